use super::{pairwise, DistanceError, DistanceMatrix, DistanceMethod, DistanceParams};
use crate::data::VariationMatrix;

/// Centre a row and scale it to unit norm. `None` for a constant row.
fn standardize(row: &[f64]) -> Option<Vec<f64>> {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let centred: Vec<f64> = row.iter().map(|x| x - mean).collect();
    let norm = centred.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(centred.into_iter().map(|x| x / norm).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sample Pearson correlation, clamped to `[-1, 1]`. `None` if either
/// series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (a, b) = (standardize(a)?, standardize(b)?);
    Some(dot(&a, &b).clamp(-1.0, 1.0))
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && row[order[j]] == row[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

fn standardized_rows(
    v: &VariationMatrix,
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<Vec<Vec<f64>>, DistanceError> {
    rows.enumerate()
        .map(|(i, r)| standardize(&r).ok_or_else(|| DistanceError::Degenerate(v.asset_ids()[i].clone())))
        .collect()
}

fn correlation_distance(
    v: &VariationMatrix,
    z: &[Vec<f64>],
    method: DistanceMethod,
) -> Result<DistanceMatrix, DistanceError> {
    let values = pairwise(v.n_assets(), |i, j| {
        let rho = dot(&z[i], &z[j]).clamp(-1.0, 1.0);
        Ok((1.0 - rho) / 2.0)
    })?;
    DistanceMatrix::new(v.asset_ids().to_vec(), values, method, DistanceParams::default())
}

fn check_len(v: &VariationMatrix) -> Result<(), DistanceError> {
    if v.n_cols() < 3 {
        return Err(DistanceError::TooShort { have: v.n_cols(), need: 3 });
    }
    Ok(())
}

pub fn pearson_distance(v: &VariationMatrix) -> Result<DistanceMatrix, DistanceError> {
    check_len(v)?;
    let z = standardized_rows(v, v.values().iter().cloned())?;
    correlation_distance(v, &z, DistanceMethod::Pearson)
}

pub fn spearman_distance(v: &VariationMatrix) -> Result<DistanceMatrix, DistanceError> {
    check_len(v)?;
    let z = standardized_rows(v, v.values().iter().map(|r| average_ranks(r)))?;
    correlation_distance(v, &z, DistanceMethod::Spearman)
}

/// Standardized rank rows; shared with the GNPR distance.
pub(super) fn standardized_ranks(v: &VariationMatrix) -> Result<Vec<Vec<f64>>, DistanceError> {
    standardized_rows(v, v.values().iter().map(|r| average_ranks(r)))
}

pub(super) fn rank_correlation(za: &[f64], zb: &[f64]) -> f64 {
    dot(za, zb).clamp(-1.0, 1.0)
}
