use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::StabilityError;
use crate::data::VariationMatrix;
use crate::distances::pearson;
use crate::perturbations::sliding_windows;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCorrPoint {
    /// First column of the window.
    pub start: usize,
    /// One past the last column.
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_date: Option<NaiveDate>,
    pub mean: f64,
    /// Pairs that entered the mean (degenerate rows are skipped).
    pub pairs: usize,
}

/// Mean of the upper-triangle Pearson correlations over sliding windows.
pub fn mean_correlation_series(
    v: &VariationMatrix,
    window: usize,
    step: usize,
) -> Result<Vec<MeanCorrPoint>, StabilityError> {
    let split = sliding_windows(v.n_cols(), window, step)?;
    let n = v.n_assets();
    let dates = v.dates();
    split
        .parts
        .iter()
        .map(|part| {
            let (start, end) = (part.indices[0], part.indices[0] + window);
            let rows: Vec<&[f64]> = (0..n).map(|i| &v.row(i)[start..end]).collect();
            let (mut sum, mut count) = (0.0, 0usize);
            for i in 0..n {
                for j in i + 1..n {
                    if let Some(r) = pearson(rows[i], rows[j]) {
                        sum += r;
                        count += 1;
                    }
                }
            }
            if count == 0 {
                return Err(StabilityError::AllDegenerate { start });
            }
            Ok(MeanCorrPoint {
                start,
                end,
                end_date: dates.get(end - 1).copied(),
                mean: sum / count as f64,
                pairs: count,
            })
        })
        .collect()
}
