use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::distances::DistanceMatrix;

/// One agglomeration step. Node ids: leaves are `0..N`, the cluster created
/// by merge `i` is `N + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    asset_ids: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(asset_ids: Vec<String>, merges: Vec<Merge>) -> Result<Self, ClusterError> {
        let n = asset_ids.len();
        if n < 2 {
            return Err(ClusterError::TooSmall(n));
        }
        if merges.len() != n - 1 {
            return Err(ClusterError::InvalidDendrogram(format!("{} merges for {n} leaves", merges.len())));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut sizes: Vec<usize> = vec![1; n];
        for (i, m) in merges.iter().enumerate() {
            let id = n + i;
            for child in [m.left, m.right] {
                if child >= id || used[child] {
                    return Err(ClusterError::InvalidDendrogram(format!(
                        "merge {i} uses node {child} twice or before it exists"
                    )));
                }
                used[child] = true;
            }
            if !(m.height.is_finite() && m.height >= 0.0) {
                return Err(ClusterError::InvalidDendrogram(format!("merge {i} height {}", m.height)));
            }
            let size = sizes[m.left] + sizes[m.right];
            if size != m.size {
                return Err(ClusterError::InvalidDendrogram(format!(
                    "merge {i} records size {} but joins {size} leaves",
                    m.size
                )));
            }
            sizes.push(size);
        }
        Ok(Self { asset_ids, merges })
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.asset_ids.len()
    }
}

/// Pair ordering: distance first, then the pair of node ids
/// lexicographically (smaller id first).
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f64,
    lo: usize,
    hi: usize,
    slot: usize,
}

impl Candidate {
    fn key_cmp(&self, other: &Candidate) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.lo.cmp(&other.lo)).then(self.hi.cmp(&other.hi))
    }
}

/// WPGMA agglomeration. After merging `u` and `v` into `w`,
/// `d(w, x) = (d(u, x) + d(v, x)) / 2` for every other active `x`.
///
/// The closest pair is merged at each step; ties go to the smallest pair of
/// node ids in lexicographic order. Each active cluster caches its nearest
/// neighbour and rows are only rescanned when their cached neighbour merged.
pub fn wpgma_linkage(d: &DistanceMatrix) -> Result<Dendrogram, ClusterError> {
    let n = d.len();
    if n < 2 {
        return Err(ClusterError::TooSmall(n));
    }
    for i in 0..n {
        for j in 0..n {
            if !d.get(i, j).is_finite() {
                return Err(ClusterError::NonFinite(i, j));
            }
        }
    }

    // slots 0..n hold the working matrix; a merged cluster reuses the slot
    // of its lower-slot child
    let mut dist: Vec<Vec<f64>> = d.values().to_vec();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size: Vec<usize> = vec![1; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut nearest: Vec<Option<Candidate>> = vec![None; n];

    let scan = |a: usize, dist: &[Vec<f64>], node: &[usize], active: &[bool]| -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for b in 0..n {
            if b == a || !active[b] {
                continue;
            }
            let (lo, hi) = (node[a].min(node[b]), node[a].max(node[b]));
            let c = Candidate { dist: dist[a][b], lo, hi, slot: b };
            if best.is_none_or(|cur| c.key_cmp(&cur) == Ordering::Less) {
                best = Some(c);
            }
        }
        best
    };

    for (a, slot) in nearest.iter_mut().enumerate() {
        *slot = scan(a, &dist, &node, &active);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let (a, best) = (0..n)
            .filter(|&a| active[a])
            .filter_map(|a| nearest[a].map(|c| (a, c)))
            .min_by(|x, y| x.1.key_cmp(&y.1))
            .expect("at least two active clusters");
        let b = best.slot;
        let (keep, drop) = (a.min(b), a.max(b));
        let (left, right) = (best.lo, best.hi);
        let new_id = n + step;
        merges.push(Merge { left, right, height: best.dist, size: size[keep] + size[drop] });

        active[drop] = false;
        nearest[drop] = None;
        for x in 0..n {
            if !active[x] || x == keep {
                continue;
            }
            let v = (dist[keep][x] + dist[drop][x]) / 2.0;
            dist[keep][x] = v;
            dist[x][keep] = v;
        }
        size[keep] += size[drop];
        node[keep] = new_id;

        nearest[keep] = scan(keep, &dist, &node, &active);
        for x in 0..n {
            if !active[x] || x == keep {
                continue;
            }
            match nearest[x] {
                Some(c) if c.slot == keep || c.slot == drop => {
                    nearest[x] = scan(x, &dist, &node, &active);
                }
                Some(c) => {
                    let cand =
                        Candidate { dist: dist[x][keep], lo: node[x].min(new_id), hi: node[x].max(new_id), slot: keep };
                    if cand.key_cmp(&c) == Ordering::Less {
                        nearest[x] = Some(cand);
                    }
                }
                None => nearest[x] = scan(x, &dist, &node, &active),
            }
        }
    }
    Dendrogram::new(d.asset_ids().to_vec(), merges)
}
