use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::StabilityError;
use crate::clustering::Partition;
use crate::data::VariationKind;
use crate::distances::{DistanceMethod, DistanceParams};
use crate::report::{render_svg, sankey_layout, SvgStyle};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub method: DistanceMethod,
    pub params: DistanceParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub kind: VariationKind,
    pub scale: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSpec {
    pub linkage: String,
    pub k: usize,
}

/// Where a part came from. Only the fields relevant to the perturbation are
/// present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PartRecord {
    pub label: String,
    /// Variation columns used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_range: Option<[NaiveDate; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maturity: Option<String>,
    /// Asset list when it differs from the report's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assets: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AriMatrix {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the input files (or of the synthetic spec).
    pub input_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub experiment: String,
    pub perturbation: String,
    pub distance: DistanceSpec,
    /// Absent for term-structure runs, which work on quotes directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<Preprocessing>,
    pub clustering: ClusteringSpec,
    pub assets: Vec<String>,
    pub parts: Vec<PartRecord>,
    /// Cluster label of each asset, per part.
    pub partitions: IndexMap<String, Vec<usize>>,
    pub ari: AriMatrix,
    /// ARI of each part against the generating clusters (synthetic inputs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_ari: Option<IndexMap<String, f64>>,
    pub provenance: Provenance,
}

impl StabilityReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn labels(&self) -> &[String] {
        &self.ari.labels
    }

    pub fn partition(&self, label: &str) -> Result<Partition> {
        let part = self
            .parts
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| StabilityError::UnknownPart(label.to_string()))?;
        let labels = self.partitions.get(label).ok_or_else(|| StabilityError::UnknownPart(label.to_string()))?;
        let assets = part.assets.clone().unwrap_or_else(|| self.assets.clone());
        Ok(Partition::new(assets, labels.clone())?)
    }

    pub fn ari_between(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.ari.labels.iter().position(|l| l == a)?;
        let j = self.ari.labels.iter().position(|l| l == b)?;
        Some(self.ari.matrix[i][j])
    }

    /// One Sankey SVG per adjacent pair of parts, restricted to the assets
    /// both parts share. Returned as `(file name, document)`.
    pub fn sankey_svgs(&self, style: &SvgStyle) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for (i, pair) in self.parts.windows(2).enumerate() {
            let (a, b) = (&pair[0].label, &pair[1].label);
            let (p, q) = common_restriction(&self.partition(a)?, &self.partition(b)?)?;
            let diagram = sankey_layout(&[(a.clone(), p), (b.clone(), q)])?;
            let name = format!("sankey_{i:02}_{}__{}.svg", file_safe(a), file_safe(b));
            out.push((name, render_svg(&diagram, style)?));
        }
        Ok(out)
    }
}

/// Restrict two partitions to their shared assets, in the left one's order.
pub fn common_restriction(p: &Partition, q: &Partition) -> Result<(Partition, Partition), StabilityError> {
    if p.asset_ids() == q.asset_ids() {
        return Ok((p.clone(), q.clone()));
    }
    let common: Vec<String> = p.asset_ids().iter().filter(|id| q.asset_ids().contains(id)).cloned().collect();
    if common.len() < 2 {
        return Err(StabilityError::TooFewAssets(common.len()));
    }
    Ok((p.restrict(&common)?, q.restrict(&common)?))
}

/// Keep `[A-Za-z0-9._-]`, replace everything else with `_`.
pub fn file_safe(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' }).collect()
}
