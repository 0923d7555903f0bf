//! Sankey diagrams of partition sequences.

mod sankey;
mod svg;

use thiserror::Error;

pub use sankey::{sankey_layout, SankeyColumn, SankeyDiagram, SankeyLink, SankeyNode};
pub use svg::{render_svg, SvgStyle};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("at least 2 partitions required, got {0}")]
    TooFewPartitions(usize),
    #[error("partition '{0}' is over a different asset list than the first column")]
    MismatchedAssets(String),
    #[error("invalid diagram: {0}")]
    Invalid(String),
}
