//! Partition comparison and perturbation experiments.

mod ari;
mod config;
mod experiment;
mod meancorr;
mod report;

use thiserror::Error;

use crate::clustering::ClusterError;
use crate::perturbations::PerturbError;

pub use ari::{ari, contingency};
pub use config::{
    default_kind, ClusteringConfig, DistanceConfig, ExperimentConfig, ImputeConfig, InputConfig, MaskConfig,
    PerturbationConfig, PreprocessingConfig,
};
pub use experiment::{default_variations, run_experiment, write_outputs, ExperimentOutput};
pub use meancorr::{mean_correlation_series, MeanCorrPoint};
pub use report::{
    common_restriction, file_safe, AriMatrix, ClusteringSpec, DistanceSpec, PartRecord, Preprocessing, Provenance,
    StabilityReport,
};

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("partitions are over different asset lists")]
    MismatchedAssets,
    #[error("{0} assets in common, at least 2 required")]
    TooFewAssets(usize),
    #[error("every pair is degenerate in the window starting at column {start}")]
    AllDegenerate { start: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("duplicate part label '{0}'")]
    DuplicateLabel(String),
    #[error("no part labelled '{0}'")]
    UnknownPart(String),
    #[error("asset '{asset}': {message}")]
    Asset { asset: String, message: String },
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}
