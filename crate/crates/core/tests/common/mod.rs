//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use clustab::clustering::Partition;
use clustab::distances::DistanceMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Merge as `(left, right, height, size)` with `left < right`.
pub type RefMerge = (usize, usize, f64, usize);

/// Brute-force WPGMA: every step scans all pairs of active nodes and asks a
/// memoised recursive definition for their distance. The distance to a
/// merged node is the plain average over its two children, expanding the
/// younger node first, which is what the weighted update computes.
pub struct BruteWpgma<'a> {
    base: &'a [Vec<f64>],
    children: HashMap<usize, (usize, usize)>,
    memo: HashMap<(usize, usize), f64>,
}

impl<'a> BruteWpgma<'a> {
    fn dist(&mut self, a: usize, b: usize) -> f64 {
        let (young, old) = if a > b { (a, b) } else { (b, a) };
        if let Some(&d) = self.memo.get(&(young, old)) {
            return d;
        }
        let d = match self.children.get(&young).copied() {
            None => self.base[young][old],
            Some((l, r)) => (self.dist(l, old) + self.dist(r, old)) / 2.0,
        };
        self.memo.insert((young, old), d);
        d
    }
}

pub fn brute_wpgma(values: &[Vec<f64>]) -> Vec<RefMerge> {
    let n = values.len();
    let mut st = BruteWpgma { base: values, children: HashMap::new(), memo: HashMap::new() };
    let mut active: Vec<usize> = (0..n).collect();
    let mut size: HashMap<usize, usize> = (0..n).map(|i| (i, 1)).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let (a, b) = (active[i].min(active[j]), active[i].max(active[j]));
                let d = st.dist(a, b);
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => d < bd || (d == bd && (a, b) < (ba, bb)),
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        let (d, a, b) = best.expect("two active nodes");
        let id = n + step;
        st.children.insert(id, (a, b));
        let s = size[&a] + size[&b];
        size.insert(id, s);
        active.retain(|&x| x != a && x != b);
        active.push(id);
        out.push((a, b, d, s));
    }
    out
}

/// Flat clustering after the first `n - k` merges, as raw labels (the
/// smallest leaf in each cluster).
pub fn brute_cut(n: usize, merges: &[RefMerge], k: usize) -> Vec<usize> {
    let mut members: HashMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    for (step, &(a, b, _, _)) in merges.iter().take(n - k).enumerate() {
        let mut m = members.remove(&a).unwrap();
        m.extend(members.remove(&b).unwrap());
        members.insert(n + step, m);
    }
    let mut label = vec![0; n];
    for m in members.values() {
        let min = *m.iter().min().unwrap();
        for &i in m {
            label[i] = min;
        }
    }
    label
}

/// Symmetric matrix with entries in `[0, 1)`. `levels > 0` quantises them
/// to that many values to force ties.
#[allow(clippy::needless_range_loop)]
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = if levels > 0 {
                f64::from(rng.random_range(1..=levels)) / f64::from(levels + 1)
            } else {
                rng.random_range(0.001..1.0)
            };
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

pub fn matrix(values: Vec<Vec<f64>>) -> DistanceMatrix {
    DistanceMatrix::from_values(values).unwrap()
}

/// ARI from the four pair counts, enumerating all pairs directly.
pub fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut n11, mut n10, mut n01, mut n00) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1,
                (true, false) => n10 += 1,
                (false, true) => n01 += 1,
                (false, false) => n00 += 1,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0 {
        // both trivial: agreement iff no pair is split differently
        return if n10 == 0 && n01 == 0 { 1.0 } else { 0.0 };
    }
    (2 * (n00 * n11 - n01 * n10)) as f64 / den as f64
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i:03}")).collect()
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Partition {
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Partition::canonical(ids(n), &raw).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
