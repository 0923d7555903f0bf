//! Price panels and their preprocessing.
//!
//! A [`PricePanel`] is the raw `N x T` matrix of quotes (spreads in basis
//! points for CDS). Clustering never runs on prices directly: they are first
//! turned into a [`VariationMatrix`] of differences or log-differences.

mod impute;
mod ingest;
mod synth;
mod variations;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use impute::{impute_proxy, PartialSeries};
pub use ingest::{load_csv, load_maturity_csvs, read_csv, LoadedPanel};
pub use synth::{business_days, synthesize, StressSegment, SyntheticPanel, SyntheticSpec, TailMix};
pub use variations::{variations, VariationKind, VariationMatrix};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },
    #[error("non-positive value {value} for asset '{asset}' on {date}")]
    NonPositive { asset: String, date: NaiveDate, value: f64 },
    #[error("non-finite value for asset '{asset}' on {date}")]
    NonFinite { asset: String, date: NaiveDate },
    #[error("insufficient data: {found} complete assets, at least {required} required")]
    InsufficientData { found: usize, required: usize },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("invalid panel shape: {0}")]
    Shape(String),
    #[error("scale {scale} too large for {prices} prices (max {max})")]
    ScaleTooLarge { scale: usize, prices: usize, max: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("asset {asset}: price path stayed non-positive after {attempts} redraws")]
    RedrawExhausted { asset: usize, attempts: usize },
    #[error("donor cluster is empty")]
    EmptyDonor,
    #[error("unknown asset '{0}'")]
    UnknownAsset(String),
    #[error("asset '{0}' has no observed suffix overlapping the panel dates")]
    NoOverlap(String),
    #[error("asset '{asset}' has a gap inside its observed suffix at {date}")]
    GapInSuffix { asset: String, date: NaiveDate },
    #[error("no files matching {0}")]
    NoMaturityFiles(String),
}

/// `N x T` matrix of quotes: one row per asset, one column per date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePanel {
    asset_ids: Vec<String>,
    dates: Vec<NaiveDate>,
    values: Vec<Vec<f64>>,
    maturity: Option<String>,
}

impl PricePanel {
    pub fn new(asset_ids: Vec<String>, dates: Vec<NaiveDate>, values: Vec<Vec<f64>>) -> Result<Self, DataError> {
        if asset_ids.len() < 2 {
            return Err(DataError::InsufficientData { found: asset_ids.len(), required: 2 });
        }
        if dates.len() < 3 {
            return Err(DataError::Shape(format!("{} dates, at least 3 required", dates.len())));
        }
        if values.len() != asset_ids.len() {
            return Err(DataError::Shape(format!("{} rows for {} assets", values.len(), asset_ids.len())));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(if w[1] == w[0] {
                    DataError::DuplicateDate(w[0])
                } else {
                    DataError::Shape(format!("dates not increasing: {} then {}", w[0], w[1]))
                });
            }
        }
        for (id, row) in asset_ids.iter().zip(&values) {
            if row.len() != dates.len() {
                return Err(DataError::Shape(format!(
                    "asset '{id}' has {} values for {} dates",
                    row.len(),
                    dates.len()
                )));
            }
            for (&v, &d) in row.iter().zip(&dates) {
                if !v.is_finite() {
                    return Err(DataError::NonFinite { asset: id.clone(), date: d });
                }
                if v <= 0.0 {
                    return Err(DataError::NonPositive { asset: id.clone(), date: d, value: v });
                }
            }
        }
        Ok(Self { asset_ids, dates, values, maturity: None })
    }

    pub fn with_maturity(mut self, maturity: impl Into<String>) -> Self {
        self.maturity = Some(maturity.into());
        self
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn maturity(&self) -> Option<&str> {
        self.maturity.as_deref()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.asset_ids.iter().position(|a| a == id)
    }

    /// Keep only the assets at `indices`, in the given order.
    pub fn select_assets(&self, indices: &[usize]) -> Result<Self, DataError> {
        let ids = indices.iter().map(|&i| self.asset_ids[i].clone()).collect();
        let values = indices.iter().map(|&i| self.values[i].clone()).collect();
        let mut out = Self::new(ids, self.dates.clone(), values)?;
        out.maturity = self.maturity.clone();
        Ok(out)
    }

    /// `date,<ids...>` CSV as read by [`read_csv`]. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for id in &self.asset_ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (t, d) in self.dates.iter().enumerate() {
            out.push_str(&d.to_string());
            for row in &self.values {
                out.push(',');
                out.push_str(&row[t].to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Append one asset row; the row is validated like any other.
    pub fn push_asset(&self, id: String, row: Vec<f64>) -> Result<Self, DataError> {
        if self.index_of(&id).is_some() {
            return Err(DataError::Shape(format!("asset '{id}' already present")));
        }
        let mut ids = self.asset_ids.clone();
        let mut values = self.values.clone();
        ids.push(id);
        values.push(row);
        let mut out = Self::new(ids, self.dates.clone(), values)?;
        out.maturity = self.maturity.clone();
        Ok(out)
    }
}
