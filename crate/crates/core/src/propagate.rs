//! Nearest-neighbor transfer of cluster labels onto unclustered documents.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};

/// One propagated label, serialized as a JSONL row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub doc_id: String,
    pub cluster: i64,
    pub neighbor_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationMap {
    pub provider: String,
    pub source_mode: String,
    /// In target row order.
    pub assignments: Vec<Assignment>,
}

impl PropagationMap {
    pub fn labels(&self) -> Vec<i64> {
        self.assignments.iter().map(|a| a.cluster).collect()
    }
}

/// Assigns each target row the label of its most cosine-similar source row
/// (ties to the lower source index). With `neighbors > 1` the label is the
/// majority among the top neighbors, ties to the label of the nearer one;
/// `neighbor_id` and `similarity` always describe the single nearest row.
pub fn propagate_labels(
    source: &EmbeddingMatrix,
    source_labels: &[i64],
    target: &EmbeddingMatrix,
    neighbors: usize,
) -> Result<PropagationMap> {
    if source.is_empty() {
        return Err(Error::InvalidArgument("propagation source is empty".into()));
    }
    if source_labels.len() != source.len() {
        return Err(Error::InvalidArgument(format!(
            "{} source rows but {} labels",
            source.len(),
            source_labels.len()
        )));
    }
    if source.dim() != target.dim() {
        return Err(Error::InvalidArgument(format!(
            "source dim {} differs from target dim {}",
            source.dim(),
            target.dim()
        )));
    }
    if source.provider_name() != target.provider_name() {
        return Err(Error::InvalidArgument(format!(
            "source provider {:?} differs from target provider {:?}",
            source.provider_name(),
            target.provider_name()
        )));
    }
    let neighbors = neighbors.clamp(1, source.len());
    let assignments = (0..target.len())
        .into_par_iter()
        .map(|t| {
            let row = target.row(t);
            // rows are unit length, so the dot product is the cosine
            let mut top: Vec<(f64, usize)> = Vec::with_capacity(neighbors + 1);
            for (s, src) in source.rows().enumerate() {
                let sim = dot(row, src).clamp(-1.0, 1.0);
                let pos = top.iter().position(|&(v, _)| sim > v).unwrap_or(top.len());
                if pos < neighbors {
                    top.insert(pos, (sim, s));
                    top.truncate(neighbors);
                }
            }
            let (similarity, nearest) = top[0];
            let cluster = if neighbors == 1 {
                source_labels[nearest]
            } else {
                majority(top.iter().map(|&(_, s)| source_labels[s]))
            };
            Assignment {
                doc_id: target.doc_ids()[t].clone(),
                cluster,
                neighbor_id: source.doc_ids()[nearest].clone(),
                similarity,
            }
        })
        .collect();
    Ok(PropagationMap {
        provider: source.provider_name().to_string(),
        source_mode: source.mode().as_str().to_string(),
        assignments,
    })
}

/// Most frequent label; ties go to the one seen first.
fn majority(labels: impl Iterator<Item = i64>) -> i64 {
    let mut counts: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for (rank, l) in labels.enumerate() {
        counts.entry(l).or_insert((0, rank)).0 += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(l, _)| l)
        .expect("at least one neighbor")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::ReprMode;
    use crate::rng;

    fn matrix(rows: &[Vec<f64>], prefix: &str) -> EmbeddingMatrix {
        let ids = (0..rows.len()).map(|i| format!("{prefix}{i}")).collect();
        let dim = rows[0].len();
        EmbeddingMatrix::from_raw(ids, dim, rows.to_vec(), "hash", ReprMode::Abstract).unwrap()
    }

    fn random_rows(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut g = rng::seeded(seed);
        (0..n).map(|_| (0..dim).map(|_| rng::normal(&mut g)).collect()).collect()
    }

    #[test]
    fn self_propagation_is_identity() {
        let src = matrix(&random_rows(30, 5, 1), "s");
        let labels: Vec<i64> = (0..30).map(|i| i % 4).collect();
        let map = propagate_labels(&src, &labels, &src, 1).unwrap();
        for (i, a) in map.assignments.iter().enumerate() {
            assert_eq!(a.cluster, labels[i]);
            assert_eq!(a.neighbor_id, format!("s{i}"));
            assert!((a.similarity - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_go_to_lower_source_index() {
        let src = matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]], "s");
        let tgt = matrix(&[vec![1.0, 1.0]], "t");
        let map = propagate_labels(&src, &[7, 3], &tgt, 1).unwrap();
        assert_eq!(map.assignments[0].cluster, 7);
        assert_eq!(map.assignments[0].neighbor_id, "s0");
    }

    #[test]
    fn matches_double_loop() {
        let src = matrix(&random_rows(50, 8, 2), "s");
        let tgt = matrix(&random_rows(100, 8, 3), "t");
        let labels: Vec<i64> = (0..50).map(|i| (i * 7 % 5) as i64).collect();
        let map = propagate_labels(&src, &labels, &tgt, 1).unwrap();
        for (t, a) in map.assignments.iter().enumerate() {
            let mut best = (f64::NEG_INFINITY, 0);
            for s in 0..50 {
                let c: f64 = tgt.row(t).iter().zip(src.row(s)).map(|(x, y)| x * y).sum();
                if c > best.0 {
                    best = (c, s);
                }
            }
            assert_eq!(a.cluster, labels[best.1]);
            assert!((a.similarity - best.0).abs() < 1e-12);
        }
    }

    #[test]
    fn majority_mode() {
        let src = matrix(&[vec![1.0, 0.0], vec![0.9, 0.1], vec![0.8, 0.2]], "s");
        let tgt = matrix(&[vec![1.0, 0.05]], "t");
        let map = propagate_labels(&src, &[1, 2, 2], &tgt, 3).unwrap();
        assert_eq!(map.assignments[0].cluster, 2);
        assert_eq!(map.assignments[0].neighbor_id, "s0");
        assert_eq!(majority([4, 5].into_iter()), 4);
    }

    #[test]
    fn rejects_mismatches() {
        let src = matrix(&random_rows(3, 4, 1), "s");
        let tgt = matrix(&random_rows(3, 5, 1), "t");
        assert!(propagate_labels(&src, &[0, 0, 0], &tgt, 1).is_err());
        assert!(propagate_labels(&src, &[0, 0], &src, 1).is_err());
    }
}
