use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, PricePanel};

/// Asset whose history is aligned on a panel's dates but starts late:
/// `None` on a prefix, observed on the remaining suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSeries {
    pub asset_id: String,
    pub values: Vec<Option<f64>>,
}

impl PartialSeries {
    /// Index of the first observation, checking the suffix has no gaps.
    pub fn first_observed(&self) -> Result<usize, DataError> {
        let first =
            self.values.iter().position(Option::is_some).ok_or_else(|| DataError::NoOverlap(self.asset_id.clone()))?;
        Ok(first)
    }
}

/// Fill the missing prefix of `partial` with the equal-weight mean price
/// difference of `donors` plus Gaussian noise of std `noise_sigma`, then
/// append it to `panel`.
///
/// The observed suffix is kept verbatim and the prefix is rebuilt backwards
/// from the first observed price.
pub fn impute_proxy(
    panel: &PricePanel,
    partial: &PartialSeries,
    donors: &[String],
    noise_sigma: f64,
    seed: u64,
) -> Result<PricePanel, DataError> {
    if donors.is_empty() {
        return Err(DataError::EmptyDonor);
    }
    if partial.values.len() != panel.n_dates() {
        return Err(DataError::Shape(format!(
            "partial series '{}' has {} values for {} dates",
            partial.asset_id,
            partial.values.len(),
            panel.n_dates()
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(DataError::Shape(format!("noise_sigma = {noise_sigma} must be >= 0")));
    }
    let donor_rows = donors
        .iter()
        .map(|d| panel.index_of(d).map(|i| panel.row(i)).ok_or_else(|| DataError::UnknownAsset(d.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let first = partial.first_observed()?;
    let mut row = vec![0.0; panel.n_dates()];
    for (t, v) in partial.values.iter().enumerate().skip(first) {
        row[t] = v.ok_or_else(|| DataError::GapInSuffix { asset: partial.asset_id.clone(), date: panel.dates()[t] })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = donor_rows.len() as f64;
    // differences d(t) = P(t+1) - P(t) for t < first, drawn forward in time
    let diffs: Vec<f64> = (0..first)
        .map(|t| {
            let mean = donor_rows.iter().map(|r| r[t + 1] - r[t]).sum::<f64>() / n;
            let noise: f64 = if noise_sigma > 0.0 { noise_sigma * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            mean + noise
        })
        .collect();
    for t in (0..first).rev() {
        row[t] = row[t + 1] - diffs[t];
    }
    panel.push_asset(partial.asset_id.clone(), row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::business_days;
    use chrono::NaiveDate;

    fn panel(rows: Vec<Vec<f64>>) -> PricePanel {
        let t = rows[0].len();
        let ids = (0..rows.len()).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
        let dates = business_days(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), t);
        PricePanel::new(ids, dates, rows).unwrap()
    }

    #[test]
    fn single_donor_is_copied() {
        let p = panel(vec![vec![10.0, 12.0, 11.0, 15.0], vec![5.0, 6.0, 7.0, 8.0]]);
        let partial = PartialSeries { asset_id: "X".into(), values: vec![None, None, None, Some(40.0)] };
        let out = impute_proxy(&p, &partial, &["A".into()], 0.0, 0).unwrap();
        let x = out.row(2);
        let a = out.row(0);
        for t in 0..3 {
            assert!((x[t + 1] - x[t] - (a[t + 1] - a[t])).abs() < 1e-12);
        }
        assert_eq!(x[3], 40.0);
    }

    #[test]
    fn mean_of_two_donors_rebuilds_prefix() {
        // donor diffs [1, 3] and [3, 5] -> mean [2, 4]
        let p = panel(vec![vec![10.0, 11.0, 14.0, 15.0], vec![20.0, 23.0, 28.0, 30.0]]);
        let partial = PartialSeries { asset_id: "X".into(), values: vec![None, None, Some(100.0), Some(101.0)] };
        let out = impute_proxy(&p, &partial, &["A".into(), "B".into()], 0.0, 0).unwrap();
        // backward cumulative sum oracle: 100 - 4 = 96, 96 - 2 = 94
        let mut oracle = vec![100.0];
        for d in [4.0, 2.0] {
            oracle.insert(0, oracle[0] - d);
        }
        assert_eq!(&out.row(2)[..3], oracle.as_slice());
        assert_eq!(oracle, [94.0, 96.0, 100.0]);
        assert_eq!(out.row(2)[3], 101.0);
        assert_eq!(out.asset_ids().last().unwrap(), "X");
    }

    #[test]
    fn noise_is_seeded() {
        let p = panel(vec![vec![10.0, 11.0, 14.0, 15.0], vec![20.0, 23.0, 28.0, 30.0]]);
        let partial = PartialSeries { asset_id: "X".into(), values: vec![None, None, Some(100.0), Some(101.0)] };
        let a = impute_proxy(&p, &partial, &["A".into()], 0.5, 3).unwrap();
        let b = impute_proxy(&p, &partial, &["A".into()], 0.5, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.row(2)[0], 98.0);
    }

    #[test]
    fn errors() {
        let p = panel(vec![vec![10.0, 11.0, 14.0], vec![20.0, 23.0, 28.0]]);
        let none = PartialSeries { asset_id: "X".into(), values: vec![None, None, None] };
        assert!(matches!(impute_proxy(&p, &none, &["A".into()], 0.0, 0), Err(DataError::NoOverlap(_))));
        let gap = PartialSeries { asset_id: "X".into(), values: vec![None, Some(1.0), None] };
        assert!(matches!(impute_proxy(&p, &gap, &["A".into()], 0.0, 0), Err(DataError::GapInSuffix { .. })));
        let ok = PartialSeries { asset_id: "X".into(), values: vec![None, Some(1.0), Some(2.0)] };
        assert!(matches!(impute_proxy(&p, &ok, &[], 0.0, 0), Err(DataError::EmptyDonor)));
        assert!(matches!(impute_proxy(&p, &ok, &["Z".into()], 0.0, 0), Err(DataError::UnknownAsset(_))));
    }
}
