use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{DataError, PricePanel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationKind {
    /// `P(t + k) - P(t)`
    Diff,
    /// `log P(t + k) - log P(t)`
    LogDiff,
}

impl VariationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariationKind::Diff => "diff",
            VariationKind::LogDiff => "log_diff",
        }
    }
}

impl std::str::FromStr for VariationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diff" => Ok(VariationKind::Diff),
            "log_diff" => Ok(VariationKind::LogDiff),
            other => Err(format!("unknown variation kind '{other}' (expected diff or log_diff)")),
        }
    }
}

/// Per-asset variations at a given horizon. Column `j` holds the variation
/// ending at source date index `time_indices[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationMatrix {
    asset_ids: Vec<String>,
    time_indices: Vec<usize>,
    dates: Vec<NaiveDate>,
    values: Vec<Vec<f64>>,
    kind: VariationKind,
    scale: usize,
}

impl VariationMatrix {
    /// Build directly from rows. Columns are indexed `1..=T'` against a
    /// virtual price axis; dates are left empty.
    pub fn from_rows(asset_ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let t = values.first().map_or(0, Vec::len);
        Self::build(asset_ids, (1..=t).collect(), Vec::new(), values, VariationKind::Diff, 1)
    }

    fn build(
        asset_ids: Vec<String>,
        time_indices: Vec<usize>,
        dates: Vec<NaiveDate>,
        values: Vec<Vec<f64>>,
        kind: VariationKind,
        scale: usize,
    ) -> Result<Self, DataError> {
        if asset_ids.len() != values.len() {
            return Err(DataError::Shape(format!("{} rows for {} assets", values.len(), asset_ids.len())));
        }
        let t = time_indices.len();
        if t < 2 {
            return Err(DataError::Shape(format!("{t} variation columns, at least 2 required")));
        }
        if !dates.is_empty() && dates.len() != t {
            return Err(DataError::Shape("column dates do not match column count".into()));
        }
        for (id, row) in asset_ids.iter().zip(&values) {
            if row.len() != t {
                return Err(DataError::Shape(format!("asset '{id}' has {} variations, expected {t}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(DataError::Shape(format!("asset '{id}' has non-finite variations")));
            }
        }
        Ok(Self { asset_ids, time_indices, dates, values, kind, scale })
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn time_indices(&self) -> &[usize] {
        &self.time_indices
    }

    /// Date at which each column's variation is observed; empty when the
    /// matrix was built from bare rows.
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn kind(&self) -> VariationKind {
        self.kind
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.time_indices.len()
    }

    /// Sub-matrix on the given columns (in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, DataError> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(DataError::Shape(format!("column {bad} out of range 0..{}", self.n_cols())));
        }
        let values = self.values.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect();
        let dates = if self.dates.is_empty() { Vec::new() } else { cols.iter().map(|&c| self.dates[c]).collect() };
        Self::build(
            self.asset_ids.clone(),
            cols.iter().map(|&c| self.time_indices[c]).collect(),
            dates,
            values,
            self.kind,
            self.scale,
        )
    }

    pub fn select_assets(&self, rows: &[usize]) -> Result<Self, DataError> {
        Self::build(
            rows.iter().map(|&i| self.asset_ids[i].clone()).collect(),
            self.time_indices.clone(),
            self.dates.clone(),
            rows.iter().map(|&i| self.values[i].clone()).collect(),
            self.kind,
            self.scale,
        )
    }

    /// Rebuild price paths from the variations starting at `start[i]`:
    /// cumulative sums for `Diff`, `start * exp(cumsum)` for `LogDiff`.
    /// Each output row has `T' + 1` points.
    pub fn integrate(&self, start: &[f64]) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .zip(start)
            .map(|(row, &p0)| {
                let mut out = Vec::with_capacity(row.len() + 1);
                out.push(p0);
                match self.kind {
                    VariationKind::Diff => {
                        let mut p = p0;
                        for &d in row {
                            p += d;
                            out.push(p);
                        }
                    }
                    VariationKind::LogDiff => {
                        let base = p0.ln();
                        let mut acc = 0.0;
                        for &d in row {
                            acc += d;
                            out.push((base + acc).exp());
                        }
                    }
                }
                out
            })
            .collect()
    }
}

/// Variations of `panel` at horizon `scale`, sampled at stride `scale`
/// from column 0: column `j` is `P(jk + k) - P(jk)` (or its log version).
pub fn variations(panel: &PricePanel, kind: VariationKind, scale: usize) -> Result<VariationMatrix, DataError> {
    let t = panel.n_dates();
    let max = t - 1;
    if scale == 0 || scale > max {
        return Err(DataError::ScaleTooLarge { scale, prices: t, max });
    }
    let n_cols = max / scale;
    let time_indices: Vec<usize> = (0..n_cols).map(|j| j * scale + scale).collect();
    let values = panel
        .values()
        .iter()
        .map(|row| {
            (0..n_cols)
                .map(|j| {
                    let (a, b) = (row[j * scale], row[j * scale + scale]);
                    match kind {
                        VariationKind::Diff => b - a,
                        VariationKind::LogDiff => b.ln() - a.ln(),
                    }
                })
                .collect()
        })
        .collect();
    let dates = time_indices.iter().map(|&i| panel.dates()[i]).collect();
    VariationMatrix::build(panel.asset_ids().to_vec(), time_indices, dates, values, kind, scale)
}
