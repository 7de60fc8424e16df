//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

/// Every labeling of `n` points with at most `k` blocks, in canonical
/// form (first occurrence order 0, 1, 2, ...).
pub fn canonical_labelings(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn grow(cur: &mut Vec<usize>, n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let used = cur.iter().max().map_or(0, |m| m + 1);
        for l in 0..=used.min(k - 1) {
            cur.push(l);
            grow(cur, n, k, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, k, &mut out);
    out
}

/// Every vector in `{0..k}^n`.
pub fn all_labelings(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..k).map(move |l| {
                    let mut w = v.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    out
}

/// ARI from the four pair counts, visiting every unordered pair.
pub fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

/// NMI with arithmetic normalization, from point-wise probability counts.
pub fn nmi_direct(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let la: BTreeSet<usize> = a.iter().copied().collect();
    let lb: BTreeSet<usize> = b.iter().copied().collect();
    if la.len() == 1 && lb.len() == 1 {
        return 1.0;
    }
    if la.len() == 1 || lb.len() == 1 {
        return 0.0;
    }
    let p = |f: &dyn Fn(usize) -> bool| (0..a.len()).filter(|&i| f(i)).count() as f64 / n;
    let h = |ls: &BTreeSet<usize>, xs: &[usize]| -> f64 {
        ls.iter()
            .map(|&l| {
                let q = p(&|i| xs[i] == l);
                -q * q.ln()
            })
            .sum()
    };
    let mut mi = 0.0;
    for &x in &la {
        for &y in &lb {
            let pxy = p(&|i| a[i] == x && b[i] == y);
            if pxy > 0.0 {
                mi += pxy * (pxy / (p(&|i| a[i] == x) * p(&|i| b[i] == y))).ln();
            }
        }
    }
    mi / (0.5 * (h(&la, a) + h(&lb, b)))
}

/// Exhaustive minimum inertia over all 2-way splits of `points`.
pub fn exhaustive_two_means(points: &[f64], dim: usize) -> f64 {
    let n = points.len() / dim;
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let mut total = 0.0;
        for side in [true, false] {
            let members: Vec<usize> = (0..n).filter(|&i| (mask >> i & 1 == 1) == side).collect();
            let mut mean = vec![0.0; dim];
            for &i in &members {
                for d in 0..dim {
                    mean[d] += points[i * dim + d] / members.len() as f64;
                }
            }
            for &i in &members {
                for d in 0..dim {
                    total += (points[i * dim + d] - mean[d]).powi(2);
                }
            }
        }
        best = best.min(total);
    }
    best
}

/// Triples listed in a fixture TSV as (sentence, subject, relation, object).
pub fn expected_triples(tsv: &str) -> Vec<(usize, String, String, String)> {
    tsv.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].parse().unwrap(), f[1].into(), f[2].into(), f[3].into())
        })
        .collect()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}
