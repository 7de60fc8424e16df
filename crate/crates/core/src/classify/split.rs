use std::collections::BTreeMap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

/// Per-class proportional split. The train total is `round(n · fraction)`;
/// per-class quotas are floored and the remainder goes to the largest
/// fractional parts, ties to the earlier class in sort order. Index lists
/// come back sorted.
pub fn stratified_split<L: Ord + Display>(labels: &[L], fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("train fraction {fraction} outside [0, 1]")));
    }
    let mut by_class: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((class, _)) = by_class.iter().find(|(_, members)| members.len() < 2) {
        return Err(Error::InvalidArgument(format!(
            "class {class} has a single member; stratification needs at least 2"
        )));
    }
    let quotas: Vec<f64> = by_class.values().map(|m| m.len() as f64 * fraction).collect();
    let mut take: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let target = (labels.len() as f64 * fraction).round() as usize;
    let mut order: Vec<usize> = (0..take.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let remaining = target.saturating_sub(take.iter().sum());
    // the fractional parts sum to less than the class count, so one pass suffices
    for &c in order.iter().take(remaining) {
        take[c] += 1;
    }
    let mut g = rng::seeded(seed);
    let mut split = Split {
        train: Vec::with_capacity(target),
        val: Vec::with_capacity(labels.len() - target),
    };
    for (members, &t) in by_class.into_values().zip(&take) {
        let mut members = members;
        rng::shuffle(&mut g, &mut members);
        split.train.extend_from_slice(&members[..t]);
        split.val.extend_from_slice(&members[t..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    Ok(split)
}
