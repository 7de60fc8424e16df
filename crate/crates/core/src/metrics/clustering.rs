use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;

use crate::embed::{squared_distance, RowsView};
use crate::error::{Error, Result};

/// Contingency table between two labelings, rows = first argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    pub rows: usize,
    pub cols: usize,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl Contingency {
    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut s = vec![0; self.cols];
        for r in self.counts.chunks_exact(self.cols) {
            for (acc, c) in s.iter_mut().zip(r) {
                *acc += c;
            }
        }
        s
    }
}

fn dense<T: Hash + Eq>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

pub fn contingency<A: Hash + Eq, B: Hash + Eq>(a: &[A], b: &[B]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "label arrays differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let (da, ra) = dense(a);
    let (db, cb) = dense(b);
    let mut counts = vec![0u64; ra * cb];
    for (&i, &j) in da.iter().zip(&db) {
        counts[i * cb + j] += 1;
    }
    Ok(Contingency {
        rows: ra,
        cols: cb,
        counts,
        n: a.len() as u64,
    })
}

fn pairs(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

/// Adjusted Rand index.
pub fn ari<A: Hash + Eq, B: Hash + Eq>(truth: &[A], pred: &[B]) -> Result<f64> {
    let c = contingency(truth, pred)?;
    check_len(truth.len())?;
    let index: f64 = c.counts.iter().map(|&x| pairs(x)).sum();
    let sum_a: f64 = c.row_sums().into_iter().map(pairs).sum();
    let sum_b: f64 = c.col_sums().into_iter().map(pairs).sum();
    let expected = sum_a * sum_b / pairs(c.n);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        // Both partitions are trivial (one block, or all singletons) and identical.
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information (arithmetic-mean normalization).
pub fn nmi<A: Hash + Eq, B: Hash + Eq>(truth: &[A], pred: &[B]) -> Result<f64> {
    let c = contingency(truth, pred)?;
    check_len(truth.len())?;
    let n = c.n as f64;
    let rows = c.row_sums();
    let cols = c.col_sums();
    let h_a = entropy(&rows, n);
    let h_b = entropy(&cols, n);
    if c.rows == 1 && c.cols == 1 {
        return Ok(1.0);
    }
    if c.rows == 1 || c.cols == 1 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, &ri) in rows.iter().enumerate() {
        for (j, &cj) in cols.iter().enumerate() {
            let nij = c.counts[i * c.cols + j];
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            mi += nij / n * (n * nij / (ri as f64 * cj as f64)).ln();
        }
    }
    let denom = 0.5 * (h_a + h_b);
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// Condensed upper-triangular Euclidean distance matrix.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    data: Vec<f64>,
}

impl PairwiseDistances {
    pub fn compute(points: RowsView<'_>) -> Self {
        let n = points.len();
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let a = points.row(i);
                ((i + 1)..n).map(move |j| squared_distance(a, points.row(j)).sqrt())
            })
            .collect();
        PairwiseDistances { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        let (i, j) = match i.cmp(&j) {
            Equal => return 0.0,
            Less => (i, j),
            Greater => (j, i),
        };
        // offset of row i in the condensed layout
        let offset = i * (2 * self.n - i - 1) / 2;
        self.data[offset + (j - i - 1)]
    }
}

/// Mean silhouette coefficient with Euclidean distances.
pub fn silhouette<L: Hash + Eq>(points: RowsView<'_>, labels: &[L]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    silhouette_with(&PairwiseDistances::compute(points), labels)
}

/// Silhouette over precomputed distances. Points in singleton clusters score 0.
pub fn silhouette_with<L: Hash + Eq>(dist: &PairwiseDistances, labels: &[L]) -> Result<f64> {
    let n = dist.len();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!("{n} points but {} labels", labels.len())));
    }
    let (dl, k) = dense(labels);
    if k < 2 {
        return Err(Error::UndefinedMetric(format!(
            "silhouette needs at least 2 clusters, found {k}"
        )));
    }
    let mut sizes = vec![0usize; k];
    for &l in &dl {
        sizes[l] += 1;
    }
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = dl[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[dl[j]] += dist.get(i, j);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&[0, 0, 1, 1], &[5, 5, 7, 7]).unwrap(), 1.0);
        assert_eq!(ari(&[0, 0, 1, 1, 2], &[0, 0, 0, 0, 0]).unwrap(), 0.0);
        assert!((ari(&[0, 0, 1, 1], &[0, 0, 1, 2]).unwrap() - 4.0 / 7.0).abs() < 1e-15);
        assert!(ari(&[0], &[0]).is_err());
        assert!(ari(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn nmi_examples() {
        assert_eq!(nmi(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap(), 0.0);
        assert!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap().abs() < 1e-15);
        assert_eq!(nmi(&[3, 3, 3], &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn silhouette_examples() {
        let p = [0.0, 0.0, 10.0, 10.0];
        assert_eq!(silhouette(RowsView::new(&p, 1), &[0, 0, 1, 1]).unwrap(), 1.0);
        let p = [0.0, 1.0, 2.0, 3.0];
        let s = silhouette(RowsView::new(&p, 1), &[0, 0, 1, 1]).unwrap();
        assert!((s - 7.0 / 15.0).abs() < 1e-15);
        assert!(matches!(
            silhouette(RowsView::new(&p, 1), &[0, 0, 0, 0]),
            Err(Error::UndefinedMetric(_))
        ));
        // singleton cluster contributes 0; points 0 and 1 have a = 1 and b = 2, 1
        let s = silhouette(RowsView::new(&p[..3], 1), &[0, 0, 1]).unwrap();
        let expected = ((2.0 - 1.0) / 2.0 + (1.0 - 1.0) / 1.0 + 0.0) / 3.0;
        assert!((s - expected).abs() < 1e-15);
    }

    #[test]
    fn condensed_indexing() {
        let p: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let d = PairwiseDistances::compute(RowsView::new(&p, 1));
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(d.get(i, j), (p[i] - p[j]).abs());
            }
        }
    }

    proptest! {
        #[test]
        fn relabeling_invariance(
            truth in proptest::collection::vec(0u8..4, 2..30),
            pred_seed in proptest::collection::vec(0u8..4, 30),
            perm in Just([2u8, 0, 3, 1]).prop_shuffle(),
        ) {
            let pred = &pred_seed[..truth.len()];
            let relabeled: Vec<u8> = pred.iter().map(|&l| perm[l as usize]).collect();
            prop_assert!((ari(&truth, pred).unwrap() - ari(&truth, &relabeled).unwrap()).abs() < 1e-12);
            prop_assert!((nmi(&truth, pred).unwrap() - nmi(&truth, &relabeled).unwrap()).abs() < 1e-12);
            prop_assert!((ari(pred, &truth).unwrap() - ari(&relabeled, &truth).unwrap()).abs() < 1e-12);
            let v = nmi(&truth, pred).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn self_agreement(x in proptest::collection::vec(0u8..5, 2..40)) {
            prop_assume!(x.iter().any(|&v| v != x[0]));
            prop_assert!((ari(&x, &x).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((nmi(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
