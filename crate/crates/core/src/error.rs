use thiserror::Error;

use crate::clustering::ClusterError;
use crate::data::DataError;
use crate::distances::DistanceError;
use crate::perturbations::PerturbError;
use crate::report::ReportError;
use crate::stability::StabilityError;

/// Crate-level error. Each variant names the module that failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("distances: {0}")]
    Distance(#[from] DistanceError),
    #[error("clustering: {0}")]
    Cluster(#[from] ClusterError),
    #[error("perturbations: {0}")]
    Perturb(#[from] PerturbError),
    #[error("stability: {0}")]
    Stability(#[from] StabilityError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("part '{label}': {source}")]
    Part {
        label: String,
        #[source]
        source: Box<Error>,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_part(self, label: &str) -> Self {
        Error::Part { label: label.to_string(), source: Box::new(self) }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
