//! Weighted-linkage (WPGMA) agglomerative clustering and flat cuts.

mod linkage;
mod partition;

use thiserror::Error;

pub use linkage::{wpgma_linkage, Dendrogram, Merge};
pub use partition::{cut_at_height, cut_to_k, Partition};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("at least 2 items required, got {0}")]
    TooSmall(usize),
    #[error("non-finite distance at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("k = {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),
    #[error("partitions are over different assets")]
    MismatchedAssets,
}
