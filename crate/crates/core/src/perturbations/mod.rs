//! Perturbation plans.
//!
//! Time perturbations select subsets of variation columns ([`SampleSplit`]);
//! multiscale and maturity perturbations produce alternative matrices;
//! population perturbations select subsets of assets.

mod population;
mod split;

use thiserror::Error;

use crate::data::DataError;

pub use population::{maturity_split, multiscale_plan, population_resample, tenor_years, DEFAULT_SCALES};
pub use split::{
    heart_tails, odd_even, quantile, regimes, regimes_from_dates, sliding_windows, SampleSplit, SplitPart,
};

/// Fewest columns a part may have.
pub const MIN_PART_LEN: usize = 3;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("window {window} larger than {t_count} columns")]
    WindowTooLarge { window: usize, t_count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("part '{label}' has {len} columns, at least {MIN_PART_LEN} required")]
    PartTooShort { label: String, len: usize },
    #[error("breakpoints must be strictly increasing and inside (0, {0})")]
    NonIncreasing(usize),
    #[error("degenerate split: {0}")]
    Degenerate(String),
    #[error("maturity panels are not aligned: {0}")]
    Alignment(String),
    #[error("subset of {size} assets too small (need at least {min})")]
    SubsetTooSmall { size: usize, min: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}
