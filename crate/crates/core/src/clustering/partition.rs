use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClusterError, Dendrogram};

/// Flat assignment of assets to clusters `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    asset_ids: Vec<String>,
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// `labels` must cover every value in `0..k` for some `k`.
    pub fn new(asset_ids: Vec<String>, labels: Vec<usize>) -> Result<Self, ClusterError> {
        if asset_ids.len() != labels.len() {
            return Err(ClusterError::InvalidPartition(format!(
                "{} labels for {} assets",
                labels.len(),
                asset_ids.len()
            )));
        }
        if labels.is_empty() {
            return Err(ClusterError::InvalidPartition("no assets".into()));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        labels.iter().for_each(|&l| seen[l] = true);
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ClusterError::InvalidPartition(format!("label {missing} unused (k = {k})")));
        }
        Ok(Self { asset_ids, labels, k })
    }

    /// Relabel arbitrary cluster tags so that clusters are numbered by their
    /// smallest member index.
    pub fn canonical<T: PartialEq>(asset_ids: Vec<String>, raw: &[T]) -> Result<Self, ClusterError> {
        let mut seen: Vec<&T> = Vec::new();
        let labels = raw
            .iter()
            .map(|tag| match seen.iter().position(|s| *s == tag) {
                Some(p) => p,
                None => {
                    seen.push(tag);
                    seen.len() - 1
                }
            })
            .collect();
        Self::new(asset_ids, labels)
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        self.labels.iter().for_each(|&l| s[l] += 1);
        s
    }

    /// Member indices of each cluster.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            c[l].push(i);
        }
        c
    }

    /// Same partition restricted to `ids` (kept in this partition's order),
    /// canonically relabelled.
    pub fn restrict(&self, ids: &[String]) -> Result<Self, ClusterError> {
        let (kept_ids, raw): (Vec<String>, Vec<usize>) = self
            .asset_ids
            .iter()
            .zip(&self.labels)
            .filter(|(a, _)| ids.contains(a))
            .map(|(a, &l)| (a.clone(), l))
            .unzip();
        Self::canonical(kept_ids, &raw)
    }

    /// Identical up to relabelling.
    pub fn same_clustering(&self, other: &Partition) -> bool {
        if self.asset_ids != other.asset_ids || self.k != other.k {
            return false;
        }
        let mut map = vec![None; self.k];
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            match map[a] {
                None => map[a] = Some(b),
                Some(m) if m != b => return false,
                _ => {}
            }
        }
        true
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionJson {
    k: usize,
    labels: IndexMap<String, usize>,
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PartitionJson { k: self.k, labels: self.asset_ids.iter().cloned().zip(self.labels.iter().copied()).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PartitionJson::deserialize(d)?;
        let (ids, labels): (Vec<String>, Vec<usize>) = raw.labels.into_iter().unzip();
        let p = Partition::new(ids, labels).map_err(serde::de::Error::custom)?;
        if p.k != raw.k {
            return Err(serde::de::Error::custom(format!("k = {} but labels use {}", raw.k, p.k)));
        }
        Ok(p)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn apply_merges(dend: &Dendrogram, count: usize) -> Result<Partition, ClusterError> {
    let n = dend.n_leaves();
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (i, m) in dend.merges().iter().take(count).enumerate() {
        let id = n + i;
        let (a, b) = (find(&mut parent, m.left), find(&mut parent, m.right));
        parent[a] = id;
        parent[b] = id;
    }
    let roots: Vec<usize> = (0..n).map(|leaf| find(&mut parent, leaf)).collect();
    Partition::canonical(dend.asset_ids().to_vec(), &roots)
}

/// Undo the last `k - 1` merges. Clusters are labelled by ascending smallest
/// leaf id.
pub fn cut_to_k(dend: &Dendrogram, k: usize) -> Result<Partition, ClusterError> {
    let n = dend.n_leaves();
    if k == 0 || k > n {
        return Err(ClusterError::KOutOfRange { k, n });
    }
    apply_merges(dend, n - k)
}

/// Apply merges in order while their height is `<= height`. Stops at the
/// first taller merge, so non-monotone sequences stay well defined.
pub fn cut_at_height(dend: &Dendrogram, height: f64) -> Result<Partition, ClusterError> {
    let count = dend.merges().iter().take_while(|m| m.height <= height).count();
    apply_merges(dend, count)
}
