use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterComposition {
    pub cluster: i64,
    pub total: usize,
    pub counts: BTreeMap<String, usize>,
    /// Most frequent true label; ties go to the lexicographically smallest.
    pub dominant: String,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub clusters: Vec<ClusterComposition>,
    /// Share of all points carrying their cluster's dominant label.
    pub overall_purity: f64,
}

/// Per-cluster histogram of true labels, in ascending cluster order.
pub fn cluster_composition<S: AsRef<str>>(labels: &[i64], truth: &[S]) -> Result<CompositionReport> {
    if labels.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} cluster labels but {} true labels",
            labels.len(),
            truth.len()
        )));
    }
    let mut groups: BTreeMap<i64, BTreeMap<String, usize>> = BTreeMap::new();
    for (&l, t) in labels.iter().zip(truth) {
        *groups.entry(l).or_default().entry(t.as_ref().to_string()).or_default() += 1;
    }
    let mut dominant_total = 0;
    let clusters: Vec<ClusterComposition> = groups
        .into_iter()
        .map(|(cluster, counts)| {
            let total = counts.values().sum();
            let (dominant, top) = counts
                .iter()
                .fold((String::new(), 0), |(bl, bc), (l, &c)| if c > bc { (l.clone(), c) } else { (bl, bc) });
            dominant_total += top;
            ClusterComposition {
                cluster,
                total,
                counts,
                dominant,
                purity: top as f64 / total as f64,
            }
        })
        .collect();
    let overall_purity = if labels.is_empty() {
        0.0
    } else {
        dominant_total as f64 / labels.len() as f64
    };
    Ok(CompositionReport {
        clusters,
        overall_purity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_clusters() {
        let r = cluster_composition(&[0, 0, 1], &["a", "a", "b"]).unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert!(r.clusters.iter().all(|c| c.purity == 1.0));
        assert_eq!(r.overall_purity, 1.0);
    }

    #[test]
    fn mixed_cluster() {
        let r = cluster_composition(&[0, 0, 0, 0], &["a", "a", "b", "c"]).unwrap();
        assert_eq!(r.clusters[0].purity, 0.5);
        assert_eq!(r.clusters[0].dominant, "a");
    }

    #[test]
    fn large_cluster_purity() {
        let mut truth = vec!["astro-ph"; 771];
        truth.extend(vec!["physics"; 36]);
        let r = cluster_composition(&vec![3; 807], &truth).unwrap();
        assert!((r.clusters[0].purity - 0.955).abs() < 5e-4);
        assert_eq!(r.clusters[0].total, 807);
    }

    #[test]
    fn empty_input() {
        let r = cluster_composition::<&str>(&[], &[]).unwrap();
        assert!(r.clusters.is_empty());
    }
}
