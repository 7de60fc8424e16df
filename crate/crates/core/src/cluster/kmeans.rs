use super::{Algorithm, PartitionResult};
use crate::embed::{squared_distance, RowsView};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub n_init: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            max_iter: 300,
            tol: 1e-6,
            n_init: 10,
        }
    }
}

/// Best of `n_init` k-means++/Lloyd runs by inertia; restart `r` uses
/// seed `derive_seed(seed, r)`.
pub fn kmeans_fit(x: RowsView<'_>, k: usize, seed: u64, opts: KMeansOptions) -> Result<PartitionResult> {
    check_k(x, k)?;
    let mut best: Option<PartitionResult> = None;
    for r in 0..opts.n_init.max(1) {
        let fit = lloyd(x, k, rng::derive_seed(seed, r as u64), opts);
        if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    let mut best = best.expect("at least one restart");
    best.seed = seed;
    Ok(best)
}

pub(super) fn check_k(x: RowsView<'_>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > x.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {} rows", x.len())));
    }
    Ok(())
}

fn plus_plus(x: RowsView<'_>, k: usize, rng: &mut Rng) -> Vec<f64> {
    let n = x.len();
    let mut centroids = Vec::with_capacity(k * x.dim());
    centroids.extend_from_slice(x.row(rng::below(rng, n)));
    let mut closest: Vec<f64> = x.rows().map(|r| squared_distance(r, &centroids[..x.dim()])).collect();
    for _ in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng::unit(rng) * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng::below(rng, n)
        };
        let c = x.row(pick);
        centroids.extend_from_slice(c);
        for (d, r) in closest.iter_mut().zip(x.rows()) {
            *d = d.min(squared_distance(r, c));
        }
    }
    centroids
}

/// Nearest-centroid labels (ties to the lower index) and inertia.
pub(super) fn assign(x: RowsView<'_>, centroids: &[f64]) -> (Vec<usize>, f64) {
    let dim = x.dim();
    let mut inertia = 0.0;
    let labels = x
        .rows()
        .map(|r| {
            let (mut arg, mut min) = (0, f64::INFINITY);
            for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
                let d = squared_distance(r, centroid);
                if d < min {
                    arg = c;
                    min = d;
                }
            }
            inertia += min;
            arg
        })
        .collect();
    (labels, inertia)
}

fn means(x: RowsView<'_>, labels: &[usize], k: usize) -> (Vec<f64>, Vec<usize>) {
    let dim = x.dim();
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (r, &l) in x.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(r) {
            *s += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            for s in &mut sums[c * dim..(c + 1) * dim] {
                *s /= count as f64;
            }
        }
    }
    (sums, counts)
}

/// Centroids of `labels`, moving the farthest member of the largest cluster
/// into each empty cluster. Returns whether `labels` changed.
pub(super) fn update(x: RowsView<'_>, labels: &mut [usize], k: usize) -> (Vec<f64>, bool) {
    let dim = x.dim();
    let (mut centroids, mut counts) = means(x, labels, k);
    let mut repaired = false;
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let largest = (0..k).fold(0, |best, c| if counts[c] > counts[best] { c } else { best });
        if counts[largest] < 2 {
            break;
        }
        let centre = &centroids[largest * dim..(largest + 1) * dim];
        let (mut far, mut far_d) = (usize::MAX, -1.0);
        for (i, r) in x.rows().enumerate() {
            if labels[i] == largest {
                let d = squared_distance(r, centre);
                if d > far_d {
                    far = i;
                    far_d = d;
                }
            }
        }
        log::debug!("kmeans: cluster {empty} empty, relocating point {far}");
        labels[far] = empty;
        repaired = true;
        (centroids, counts) = means(x, labels, k);
    }
    (centroids, repaired)
}

fn lloyd(x: RowsView<'_>, k: usize, seed: u64, opts: KMeansOptions) -> PartitionResult {
    let dim = x.dim();
    let mut rng = rng::seeded(seed);
    let mut centroids = plus_plus(x, k, &mut rng);
    let (mut labels, mut inertia) = assign(x, &centroids);
    let mut trace = vec![inertia];
    for _ in 0..opts.max_iter {
        let (next, _) = update(x, &mut labels, k);
        let shift = centroids
            .chunks_exact(dim)
            .zip(next.chunks_exact(dim))
            .map(|(a, b)| squared_distance(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = next;
        let (next_labels, next_inertia) = assign(x, &centroids);
        let changed = next_labels != labels;
        labels = next_labels;
        inertia = next_inertia;
        trace.push(inertia);
        if !changed || shift < opts.tol {
            break;
        }
    }
    // duplicated rows can leave a cluster empty after the final assignment
    let (centroids, repaired) = update(x, &mut labels, k);
    if repaired {
        inertia = x
            .rows()
            .zip(&labels)
            .map(|(r, &l)| squared_distance(r, &centroids[l * dim..(l + 1) * dim]))
            .sum();
        trace.push(inertia);
    }
    PartitionResult {
        algorithm: Algorithm::KMeans,
        k,
        labels,
        objective: inertia,
        seed,
        trace,
    }
}
