//! Pairwise asset distances.
//!
//! Four distances operate on a [`VariationMatrix`](crate::data::VariationMatrix):
//!
//! | method      | definition                                             |
//! |-------------|--------------------------------------------------------|
//! | `pearson`   | `(1 - rho) / 2`                                        |
//! | `spearman`  | `(1 - rho_S) / 2`                                      |
//! | `euclidean` | `sqrt(mean_t (v_i(t) - v_j(t))^2)`                     |
//! | `gnpr`      | `sqrt(theta (1 - rho_S) / 2 + (1 - theta) H^2)`        |
//!
//! A fifth, the term-structure angle, compares default densities implied by
//! CDS curves (see [`term_structure_distance`]).

mod correlation;
mod gnpr;
mod term_structure;

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::VariationMatrix;

pub use correlation::{average_ranks, pearson, pearson_distance, spearman, spearman_distance};
pub use gnpr::{default_bins, gnpr_distance, hellinger_sq, shared_histograms};
pub use term_structure::{
    spreads_to_hazard, term_structure_cosine, term_structure_distance, term_structure_matrix, HazardCurve,
    INVERTED_FLOOR,
};

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("degenerate series for asset '{0}' (zero variance or constant ranks)")]
    Degenerate(String),
    #[error("{have} observations, at least {need} required")]
    TooShort { have: usize, need: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("histograms have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("histogram is not a probability vector (sum {0})")]
    NotNormalized(f64),
    #[error("inverted curve: non-positive hazard on the interval ending at tenor {tenor}")]
    InvertedCurve { tenor: f64 },
    #[error("invalid hazard curve: {0}")]
    InvalidCurve(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    Pearson,
    Spearman,
    Euclidean,
    Gnpr,
    TermStructure,
}

impl DistanceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMethod::Pearson => "pearson",
            DistanceMethod::Spearman => "spearman",
            DistanceMethod::Euclidean => "euclidean",
            DistanceMethod::Gnpr => "gnpr",
            DistanceMethod::TermStructure => "term_structure",
        }
    }

    fn upper_bound(self) -> Option<f64> {
        match self {
            DistanceMethod::Pearson | DistanceMethod::Spearman | DistanceMethod::Gnpr => Some(1.0),
            DistanceMethod::TermStructure => Some(std::f64::consts::FRAC_PI_2),
            DistanceMethod::Euclidean => None,
        }
    }
}

impl FromStr for DistanceMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pearson" => Ok(Self::Pearson),
            "spearman" => Ok(Self::Spearman),
            "euclidean" => Ok(Self::Euclidean),
            "gnpr" => Ok(Self::Gnpr),
            "term_structure" => Ok(Self::TermStructure),
            other => Err(format!("unknown distance method '{other}'")),
        }
    }
}

/// Method parameters recorded alongside a matrix. Only GNPR uses them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
}

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric, zero-diagonal, non-negative `N x N` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    asset_ids: Vec<String>,
    values: Vec<Vec<f64>>,
    method: DistanceMethod,
    params: DistanceParams,
}

impl DistanceMatrix {
    pub fn new(
        asset_ids: Vec<String>,
        values: Vec<Vec<f64>>,
        method: DistanceMethod,
        params: DistanceParams,
    ) -> Result<Self, DistanceError> {
        let n = asset_ids.len();
        let bad = |m: String| Err(DistanceError::InvalidMatrix(m));
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return bad(format!("expected a {n}x{n} matrix"));
        }
        let upper = method.upper_bound();
        for (i, row) in values.iter().enumerate() {
            if row[i] != 0.0 {
                return bad(format!("non-zero diagonal at {i}"));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("entry ({i}, {j}) = {v}"));
                }
                if (v - values[j][i]).abs() > SYMMETRY_TOL {
                    return bad(format!("asymmetric at ({i}, {j})"));
                }
                if let Some(u) = upper {
                    if v > u + SYMMETRY_TOL {
                        return bad(format!("entry ({i}, {j}) = {v} above {u}"));
                    }
                }
            }
        }
        Ok(Self { asset_ids, values, method, params })
    }

    /// Unlabelled matrix for callers that only need clustering.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self, DistanceError> {
        let ids = (0..values.len()).map(|i| i.to_string()).collect();
        Self::new(ids, values, DistanceMethod::Euclidean, DistanceParams::default())
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asset_ids.is_empty()
    }

    pub fn method(&self) -> DistanceMethod {
        self.method
    }

    pub fn params(&self) -> DistanceParams {
        self.params
    }

    /// Header row of asset ids followed by the square body.
    pub fn to_csv(&self) -> String {
        let mut out = self.asset_ids.join(",");
        out.push('\n');
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Fill a symmetric matrix from a pair function, upper triangle in parallel.
pub(crate) fn pairwise<F>(n: usize, f: F) -> Result<Vec<Vec<f64>>, DistanceError>
where
    F: Fn(usize, usize) -> Result<f64, DistanceError> + Sync,
{
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| f(i, j)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let mut out = vec![vec![0.0; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

pub fn euclidean_distance(v: &VariationMatrix) -> Result<DistanceMatrix, DistanceError> {
    let t = v.n_cols();
    if t < 2 {
        return Err(DistanceError::TooShort { have: t, need: 2 });
    }
    let rows = v.values();
    let values = pairwise(v.n_assets(), |i, j| {
        let ss: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((ss / t as f64).sqrt())
    })?;
    DistanceMatrix::new(v.asset_ids().to_vec(), values, DistanceMethod::Euclidean, DistanceParams::default())
}

/// Dispatch on `method`. `params` is only read for GNPR.
pub fn compute(
    v: &VariationMatrix,
    method: DistanceMethod,
    params: DistanceParams,
) -> Result<DistanceMatrix, DistanceError> {
    match method {
        DistanceMethod::Pearson => pearson_distance(v),
        DistanceMethod::Spearman => spearman_distance(v),
        DistanceMethod::Euclidean => euclidean_distance(v),
        DistanceMethod::Gnpr => gnpr_distance(v, params.theta.unwrap_or(0.5), params.bins),
        DistanceMethod::TermStructure => Err(DistanceError::InvalidParam(
            "term_structure distances are built from hazard curves, not variations".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn vm(rows: Vec<Vec<f64>>) -> VariationMatrix {
        let ids = (0..rows.len()).map(|i| format!("a{i}")).collect();
        VariationMatrix::from_rows(ids, rows).unwrap()
    }

    #[test]
    fn euclidean_direct_formula() {
        let d = euclidean_distance(&vm(vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![0.0, 0.0]])).unwrap();
        assert!((d.get(0, 1) - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.get(0, 2), 0.0);
    }

    #[test]
    fn euclidean_grows_with_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = 2.0;
        let rows: Vec<Vec<f64>> =
            (0..4).map(|_| (0..100_000).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let d = euclidean_distance(&vm(rows)).unwrap();
        let mut total = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                total += d.get(i, j).powi(2);
            }
        }
        let mean = total / 6.0;
        assert!((mean - 8.0).abs() / 8.0 < 0.05, "mean D^2 = {mean}");
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_values(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(DistanceMatrix::from_values(vec![vec![0.0, 1.0], vec![0.5, 0.0]]).is_err());
        assert!(DistanceMatrix::from_values(vec![vec![0.1, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_values(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_values(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).is_err());
        assert!(DistanceMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.5], vec![1.5, 0.0]],
            DistanceMethod::Pearson,
            DistanceParams::default()
        )
        .is_err());
    }

    #[test]
    fn csv_layout() {
        let d = DistanceMatrix::new(
            vec!["x".into(), "y".into()],
            vec![vec![0.0, 0.25], vec![0.25, 0.0]],
            DistanceMethod::Pearson,
            DistanceParams::default(),
        )
        .unwrap();
        assert_eq!(d.to_csv(), "x,y\n0,0.25\n0.25,0\n");
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            DistanceMethod::Pearson,
            DistanceMethod::Spearman,
            DistanceMethod::Euclidean,
            DistanceMethod::Gnpr,
            DistanceMethod::TermStructure,
        ] {
            assert_eq!(m.as_str().parse::<DistanceMethod>().unwrap(), m);
        }
        assert!("cosine".parse::<DistanceMethod>().is_err());
    }
}
