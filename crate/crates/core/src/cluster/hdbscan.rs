use serde::{Deserialize, Serialize};

use super::NOISE;
use crate::embed::RowsView;
use crate::error::{Error, Result};
use crate::metrics::PairwiseDistances;

/// Density-based flat clustering; `labels[i] == NOISE` marks noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityResult {
    pub labels: Vec<i64>,
    pub n_clusters: usize,
    pub noise_fraction: f64,
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl DensityResult {
    fn from_labels(labels: Vec<i64>, min_cluster_size: usize, min_samples: usize) -> Self {
        let noise = labels.iter().filter(|&&l| l == NOISE).count();
        let n_clusters = labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
        let noise_fraction = noise as f64 / labels.len() as f64;
        DensityResult {
            labels,
            n_clusters,
            noise_fraction,
            min_cluster_size,
            min_samples,
        }
    }
}

// Merge heights of zero would give infinite density.
const MAX_LAMBDA: f64 = 1e12;

fn lambda(distance: f64) -> f64 {
    if distance > 0.0 {
        (1.0 / distance).min(MAX_LAMBDA)
    } else {
        MAX_LAMBDA
    }
}

pub fn hdbscan_fit(x: RowsView<'_>, min_cluster_size: usize, min_samples: Option<usize>) -> Result<DensityResult> {
    hdbscan_with(&PairwiseDistances::compute(x), min_cluster_size, min_samples)
}

/// HDBSCAN over precomputed distances. `min_samples` defaults to
/// `min_cluster_size`; the core distance counts the point itself.
pub fn hdbscan_with(
    dist: &PairwiseDistances,
    min_cluster_size: usize,
    min_samples: Option<usize>,
) -> Result<DensityResult> {
    let n = dist.len();
    let min_samples = min_samples.unwrap_or(min_cluster_size);
    if min_cluster_size < 2 {
        return Err(Error::InvalidArgument("min_cluster_size must be at least 2".into()));
    }
    if n < min_cluster_size {
        return Err(Error::InvalidArgument(format!(
            "{n} rows is fewer than min_cluster_size {min_cluster_size}"
        )));
    }
    if min_samples == 0 || min_samples > n {
        return Err(Error::InvalidArgument(format!("min_samples {min_samples} outside 1..={n}")));
    }
    let all_identical = (0..n).all(|i| (i + 1..n).all(|j| dist.get(i, j) == 0.0));
    if all_identical {
        return Ok(DensityResult::from_labels(vec![0; n], min_cluster_size, min_samples));
    }
    let core = core_distances(dist, min_samples);
    let mst = prim(dist, &core);
    let dendrogram = single_linkage(n, mst);
    let tree = condense(&dendrogram, n, min_cluster_size);
    let selected = select_eom(&tree);
    let labels = label_points(&tree, &selected, n);
    Ok(DensityResult::from_labels(labels, min_cluster_size, min_samples))
}

fn core_distances(dist: &PairwiseDistances, min_samples: usize) -> Vec<f64> {
    let n = dist.len();
    let mut row = vec![0.0; n];
    (0..n)
        .map(|i| {
            for (j, d) in row.iter_mut().enumerate() {
                *d = dist.get(i, j);
            }
            let (_, kth, _) = row.select_nth_unstable_by(min_samples - 1, f64::total_cmp);
            *kth
        })
        .collect()
}

/// Minimum spanning tree of the mutual-reachability graph, grown from row 0.
fn prim(dist: &PairwiseDistances, core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = dist.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let mr = dist.get(current, j).max(core[current]).max(core[j]);
            if mr < best[j] {
                best[j] = mr;
                parent[j] = current;
            }
            if best[j] < next_d {
                next_d = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, next_d));
        current = next;
    }
    edges
}

#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Node `n + i` of the dendrogram is `merges[i]`; leaves are `0..n`.
fn single_linkage(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Vec<Merge> {
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut uf = UnionFind::new(2 * n - 1);
    let mut size = vec![1usize; 2 * n - 1];
    let mut merges = Vec::with_capacity(n - 1);
    for (i, (a, b, d)) in edges.into_iter().enumerate() {
        let (ra, rb) = (uf.find(a), uf.find(b));
        let node = n + i;
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge {
            left: ra,
            right: rb,
            distance: d,
            size: size[node],
        });
    }
    merges
}

/// A row of the condensed tree: `child` is a point (< n) or a cluster id (≥ n).
#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

struct CondensedTree {
    n: usize,
    edges: Vec<CondensedEdge>,
    /// Number of clusters; ids run from `n` (the root) to `n + count - 1`.
    count: usize,
}

fn leaves(dendrogram: &[Merge], n: usize, node: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(v) = stack.pop() {
        if v < n {
            out.push(v);
        } else {
            let m = dendrogram[v - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    out
}

fn condense(dendrogram: &[Merge], n: usize, min_cluster_size: usize) -> CondensedTree {
    let size_of = |v: usize| if v < n { 1 } else { dendrogram[v - n].size };
    let root = 2 * n - 2;
    let mut edges = Vec::new();
    let mut next_id = n + 1;
    // (dendrogram node, cluster it belongs to)
    let mut queue = std::collections::VecDeque::from([(root, n)]);
    while let Some((node, cluster)) = queue.pop_front() {
        if node < n {
            continue;
        }
        let m = dendrogram[node - n];
        let l = lambda(m.distance);
        let (ls, rs) = (size_of(m.left), size_of(m.right));
        let big_left = ls >= min_cluster_size;
        let big_right = rs >= min_cluster_size;
        match (big_left, big_right) {
            (true, true) => {
                for (child, size) in [(m.left, ls), (m.right, rs)] {
                    edges.push(CondensedEdge {
                        parent: cluster,
                        child: next_id,
                        lambda: l,
                        size,
                    });
                    queue.push_back((child, next_id));
                    next_id += 1;
                }
            }
            (false, false) => {
                for child in [m.left, m.right] {
                    for p in leaves(dendrogram, n, child) {
                        edges.push(CondensedEdge {
                            parent: cluster,
                            child: p,
                            lambda: l,
                            size: 1,
                        });
                    }
                }
            }
            _ => {
                let (keep, drop) = if big_left { (m.left, m.right) } else { (m.right, m.left) };
                for p in leaves(dendrogram, n, drop) {
                    edges.push(CondensedEdge {
                        parent: cluster,
                        child: p,
                        lambda: l,
                        size: 1,
                    });
                }
                queue.push_back((keep, cluster));
            }
        }
    }
    CondensedTree {
        n,
        edges,
        count: next_id - n,
    }
}

/// Excess-of-mass selection; the root is never selected.
fn select_eom(tree: &CondensedTree) -> Vec<bool> {
    let (n, count) = (tree.n, tree.count);
    let mut birth = vec![0.0; count];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); count];
    for e in &tree.edges {
        if e.child >= n {
            birth[e.child - n] = e.lambda;
            children[e.parent - n].push(e.child - n);
        }
    }
    let mut stability = vec![0.0; count];
    for e in &tree.edges {
        stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.size as f64;
    }
    let mut selected = vec![false; count];
    // children always have larger ids than their parent
    for c in (1..count).rev() {
        let subtree: f64 = children[c].iter().map(|&ch| stability[ch]).sum();
        if children[c].is_empty() || stability[c] >= subtree {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend_from_slice(&children[d]);
            }
        } else {
            stability[c] = subtree;
        }
    }
    selected
}

fn label_points(tree: &CondensedTree, selected: &[bool], n: usize) -> Vec<i64> {
    let count = tree.count;
    let mut parent_of = vec![usize::MAX; count];
    for e in &tree.edges {
        if e.child >= n {
            parent_of[e.child - n] = e.parent - n;
        }
    }
    let mut flat = vec![NOISE; count];
    let mut next = 0;
    for c in 0..count {
        if selected[c] {
            flat[c] = next;
            next += 1;
        }
    }
    // nearest selected ancestor-or-self of every cluster
    let mut owner = vec![NOISE; count];
    for c in 0..count {
        owner[c] = if selected[c] {
            flat[c]
        } else if parent_of[c] != usize::MAX {
            owner[parent_of[c]]
        } else {
            NOISE
        };
    }
    let mut labels = vec![NOISE; n];
    for e in &tree.edges {
        if e.child < n {
            labels[e.child] = owner[e.parent - n];
        }
    }
    labels
}
