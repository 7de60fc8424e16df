use std::f64::consts::PI;

use super::kmeans::{self, check_k, KMeansOptions};
use super::{Algorithm, PartitionResult};
use crate::embed::RowsView;
use crate::error::Result;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the change in mean per-sample log-likelihood.
    pub tol: f64,
    /// Added to every variance.
    pub reg: f64,
    pub n_init: usize,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            max_iter: 200,
            tol: 1e-6,
            reg: 1e-6,
            n_init: 10,
        }
    }
}

/// Diagonal-covariance mixture fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    pub partition: PartitionResult,
    /// Row-major `n × k` posterior probabilities.
    pub responsibilities: Vec<f64>,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

struct Params {
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
}

/// Best of `n_init` EM runs by log-likelihood. Each run starts from a single
/// k-means++/Lloyd fit seeded with `derive_seed(seed, r)`.
pub fn gmm_fit(x: RowsView<'_>, k: usize, seed: u64, opts: GmmOptions) -> Result<GmmFit> {
    check_k(x, k)?;
    let mut best: Option<GmmFit> = None;
    for r in 0..opts.n_init.max(1) {
        let fit = em(x, k, rng::derive_seed(seed, r as u64), opts)?;
        if best
            .as_ref()
            .is_none_or(|b| fit.partition.objective > b.partition.objective)
        {
            best = Some(fit);
        }
    }
    let mut best = best.expect("at least one restart");
    best.partition.seed = seed;
    Ok(best)
}

fn m_step(x: RowsView<'_>, resp: &[f64], k: usize, reg: f64) -> Params {
    let (n, dim) = (x.len(), x.dim());
    let mut nk = vec![0.0; k];
    let mut means = vec![0.0; k * dim];
    for (i, r) in x.rows().enumerate() {
        for c in 0..k {
            let w = resp[i * k + c];
            nk[c] += w;
            for (m, v) in means[c * dim..(c + 1) * dim].iter_mut().zip(r) {
                *m += w * v;
            }
        }
    }
    for c in 0..k {
        if nk[c] > 0.0 {
            for m in &mut means[c * dim..(c + 1) * dim] {
                *m /= nk[c];
            }
        }
    }
    let mut variances = vec![0.0; k * dim];
    for (i, r) in x.rows().enumerate() {
        for c in 0..k {
            let w = resp[i * k + c];
            let mean = &means[c * dim..(c + 1) * dim];
            for ((s, v), m) in variances[c * dim..(c + 1) * dim].iter_mut().zip(r).zip(mean) {
                *s += w * (v - m) * (v - m);
            }
        }
    }
    for c in 0..k {
        for s in &mut variances[c * dim..(c + 1) * dim] {
            *s = if nk[c] > 0.0 { *s / nk[c] } else { 0.0 } + reg;
        }
    }
    Params {
        weights: nk.iter().map(|&w| w / n as f64).collect(),
        means,
        variances,
    }
}

/// Fills `resp` with posteriors; returns per-row log-likelihoods.
fn e_step(x: RowsView<'_>, p: &Params, k: usize, resp: &mut [f64]) -> Vec<f64> {
    let dim = x.dim();
    let consts: Vec<f64> = (0..k)
        .map(|c| {
            let logdet: f64 = p.variances[c * dim..(c + 1) * dim].iter().map(|v| (2.0 * PI * v).ln()).sum();
            p.weights[c].ln() - 0.5 * logdet
        })
        .collect();
    x.rows()
        .enumerate()
        .map(|(i, r)| {
            let row = &mut resp[i * k..(i + 1) * k];
            for c in 0..k {
                let mean = &p.means[c * dim..(c + 1) * dim];
                let var = &p.variances[c * dim..(c + 1) * dim];
                let maha: f64 = r
                    .iter()
                    .zip(mean)
                    .zip(var)
                    .map(|((v, m), s)| (v - m) * (v - m) / s)
                    .sum();
                row[c] = consts[c] - 0.5 * maha;
            }
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = row.iter().map(|l| (l - max).exp()).sum();
            let lse = max + sum.ln();
            for l in row.iter_mut() {
                *l = (*l - lse).exp();
            }
            lse
        })
        .collect()
}

fn em(x: RowsView<'_>, k: usize, seed: u64, opts: GmmOptions) -> Result<GmmFit> {
    let n = x.len();
    let init = kmeans::kmeans_fit(
        x,
        k,
        seed,
        KMeansOptions {
            n_init: 1,
            ..KMeansOptions::default()
        },
    )?;
    let mut resp = vec![0.0; n * k];
    for (i, &l) in init.labels.iter().enumerate() {
        resp[i * k + l] = 1.0;
    }
    let mut params = m_step(x, &resp, k, opts.reg);
    let mut row_ll = e_step(x, &params, k, &mut resp);
    let mut ll = row_ll.iter().sum::<f64>() / n as f64;
    let mut trace = vec![ll];
    for _ in 0..opts.max_iter {
        params = m_step(x, &resp, k, opts.reg);
        if let Some(c) = params.weights.iter().position(|&w| w < 1e-12) {
            let worst = (0..n).fold(0, |a, i| if row_ll[i] < row_ll[a] { i } else { a });
            log::warn!("gmm: component {c} collapsed, re-seeding at row {worst}");
            for v in &mut resp[worst * k..(worst + 1) * k] {
                *v = 0.0;
            }
            resp[worst * k + c] = 1.0;
            params = m_step(x, &resp, k, opts.reg);
        }
        row_ll = e_step(x, &params, k, &mut resp);
        let next = row_ll.iter().sum::<f64>() / n as f64;
        trace.push(next);
        let delta = next - ll;
        ll = next;
        if delta.abs() < opts.tol {
            break;
        }
    }
    let raw: Vec<usize> = resp
        .chunks_exact(k)
        .map(|row| (0..k).fold(0, |a, c| if row[c] > row[a] { c } else { a }))
        .collect();
    let (labels, effective_k) = compact(&raw, k);
    if effective_k < k {
        log::info!("gmm: {} of {k} components own no points", k - effective_k);
    }
    Ok(GmmFit {
        partition: PartitionResult {
            algorithm: Algorithm::Gmm,
            k: effective_k,
            labels,
            objective: ll,
            seed,
            trace,
        },
        responsibilities: resp,
        weights: params.weights,
        means: params.means,
        variances: params.variances,
    })
}

/// Renumbers labels so that every id in `0..k'` is used, keeping component order.
fn compact(labels: &[usize], k: usize) -> (Vec<usize>, usize) {
    let mut used = vec![false; k];
    for &l in labels {
        used[l] = true;
    }
    let mut map = vec![0; k];
    let mut next = 0;
    for c in 0..k {
        if used[c] {
            map[c] = next;
            next += 1;
        }
    }
    (labels.iter().map(|&l| map[l]).collect(), next)
}
