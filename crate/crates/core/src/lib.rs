//! Clustering stability analysis for financial time series.
//!
//! The crate ingests (or synthesizes) panels of asset prices, turns them into
//! variation matrices, measures inter-asset dissimilarity with one of four
//! distances, clusters with weighted linkage (WPGMA) and compares the
//! partitions obtained on perturbed versions of the data with the Adjusted
//! Rand Index. Results can be drawn as Sankey diagrams.
//!
//! Modules follow the pipeline:
//!
//! * [`data`]: price panels, CSV ingestion, variations, synthetic panels, imputation.
//! * [`distances`]: Pearson, Spearman, Euclidean and GNPR distances, term-structure angle.
//! * [`clustering`]: WPGMA dendrograms and flat cuts.
//! * [`perturbations`]: time and population perturbation plans.
//! * [`stability`]: ARI, experiment orchestration, mean-correlation diagnostic.
//! * [`report`]: Sankey layout and SVG rendering.

pub mod clustering;
pub mod data;
pub mod distances;
pub mod perturbations;
pub mod report;
pub mod stability;

mod error;

pub use error::{Error, Result};
