use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::StabilityError;
use crate::data::{SyntheticSpec, VariationKind};
use crate::distances::{DistanceMethod, DistanceParams};
use crate::perturbations::DEFAULT_SCALES;
use crate::{Error, Result};

/// One experiment: an input panel, a distance, a clustering and a
/// perturbation. See `configs/` for examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub input: InputConfig,
    pub distance: DistanceConfig,
    #[serde(default)]
    pub preprocessing: PreprocessingConfig,
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    /// Directory that relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputConfig {
    Synthetic(SyntheticSpec),
    Csv {
        path: PathBuf,
        /// Impute the assets with a missing prefix and cluster them with the
        /// complete ones. Off by default: only complete assets are used.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        include_imputed: Option<ImputeConfig>,
    },
    /// Files `<dir>/<stem>_<maturity>.csv`, one per tenor.
    Maturities {
        dir: PathBuf,
        stem: String,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputeConfig {
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub method: DistanceMethod,
    #[serde(default)]
    pub params: DistanceParams,
}

/// `kind` defaults to log-differences for pearson and euclidean and to plain
/// differences for spearman and gnpr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<VariationKind>,
    #[serde(default = "one")]
    pub scale: usize,
}

impl Default for PreprocessingConfig {
    fn default() -> Self {
        Self { kind: None, scale: 1 }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    #[serde(default = "wpgma")]
    pub linkage: String,
    pub k: usize,
}

fn wpgma() -> String {
    "wpgma".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskConfig {
    /// The last `assets` assets lose their history.
    pub assets: usize,
    /// Fraction of dates hidden from the start.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationConfig {
    /// A single part covering every column.
    None {},
    SlidingWindow {
        window: usize,
        step: usize,
    },
    OddEven {},
    Regimes {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        breakpoints: Vec<NaiveDate>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        indices: Vec<usize>,
    },
    HeartTails {},
    Multiscale {
        #[serde(default = "default_scales")]
        scales: Vec<usize>,
    },
    Maturities {},
    TermStructure {
        dates: Vec<NaiveDate>,
        #[serde(default = "default_recovery")]
        recovery: f64,
        #[serde(default)]
        floor_inverted: bool,
    },
    PopulationResample {
        keep_fraction: f64,
        draws: usize,
        seed: u64,
    },
    /// Complete assets versus complete plus imputed ones.
    Imputation {
        #[serde(default)]
        noise_sigma: f64,
        #[serde(default)]
        seed: u64,
        /// Synthetic inputs have no missing data; hide a prefix first.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mask: Option<MaskConfig>,
    },
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self::None {}
    }
}

fn default_scales() -> Vec<usize> {
    DEFAULT_SCALES.to_vec()
}

fn default_recovery() -> f64 {
    0.4
}

impl PerturbationConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::None {} => "none",
            Self::SlidingWindow { .. } => "sliding_window",
            Self::OddEven {} => "odd_even",
            Self::Regimes { .. } => "regimes",
            Self::HeartTails {} => "heart_tails",
            Self::Multiscale { .. } => "multiscale",
            Self::Maturities {} => "maturities",
            Self::TermStructure { .. } => "term_structure",
            Self::PopulationResample { .. } => "population_resample",
            Self::Imputation { .. } => "imputation",
        }
    }
}

/// Log-differences for pearson and euclidean, plain differences otherwise.
pub fn default_kind(method: DistanceMethod) -> VariationKind {
    match method {
        DistanceMethod::Pearson | DistanceMethod::Euclidean => VariationKind::LogDiff,
        _ => VariationKind::Diff,
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, StabilityError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| StabilityError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and validate a config file. Relative input paths are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| StabilityError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn kind(&self) -> VariationKind {
        self.preprocessing.kind.unwrap_or_else(|| default_kind(self.distance.method))
    }

    pub fn validate(&self) -> Result<(), StabilityError> {
        let bad = |m: String| Err(StabilityError::Config(m));
        if self.experiment.trim().is_empty() {
            return bad("experiment name is empty".into());
        }
        if self.clustering.linkage != "wpgma" {
            return bad(format!("unsupported linkage '{}' (only wpgma)", self.clustering.linkage));
        }
        if self.clustering.k == 0 {
            return bad("clustering.k must be >= 1".into());
        }
        if self.preprocessing.scale == 0 {
            return bad("preprocessing.scale must be >= 1".into());
        }
        if let Some(theta) = self.distance.params.theta {
            if !(0.0..=1.0).contains(&theta) {
                return bad(format!("theta = {theta} outside [0, 1]"));
            }
        }
        let ts_method = self.distance.method == DistanceMethod::TermStructure;
        let ts_perturbation = matches!(self.perturbation, PerturbationConfig::TermStructure { .. });
        if ts_method != ts_perturbation {
            return bad("the term_structure distance goes with the term_structure perturbation only".into());
        }
        let maturities_input = matches!(self.input, InputConfig::Maturities { .. });
        match &self.perturbation {
            PerturbationConfig::Maturities {} | PerturbationConfig::TermStructure { .. } if !maturities_input => {
                return bad(format!("perturbation '{}' needs a maturities input", self.perturbation.name()));
            }
            PerturbationConfig::Maturities {} | PerturbationConfig::TermStructure { .. } => {}
            other if maturities_input => {
                return bad(format!("perturbation '{}' needs a csv or synthetic input", other.name()));
            }
            _ => {}
        }
        match &self.perturbation {
            PerturbationConfig::Regimes { breakpoints, indices } if !breakpoints.is_empty() && !indices.is_empty() => {
                bad("regimes: give breakpoints or indices, not both".into())
            }
            PerturbationConfig::Multiscale { scales } if scales.is_empty() || scales.contains(&0) => {
                bad("multiscale: scales must be non-empty and >= 1".into())
            }
            PerturbationConfig::TermStructure { dates, .. } if dates.is_empty() => {
                bad("term_structure: at least one date required".into())
            }
            PerturbationConfig::PopulationResample { keep_fraction, draws, .. }
                if *draws == 0 || !(*keep_fraction > 0.0 && *keep_fraction <= 1.0) =>
            {
                bad("population_resample: draws >= 1 and keep_fraction in (0, 1] required".into())
            }
            PerturbationConfig::Imputation { mask, noise_sigma, .. } => {
                if !(noise_sigma.is_finite() && *noise_sigma >= 0.0) {
                    return bad("imputation: noise_sigma must be >= 0".into());
                }
                match (&self.input, mask) {
                    (InputConfig::Synthetic(_), None) => bad("imputation on a synthetic input needs a mask".into()),
                    (InputConfig::Csv { include_imputed: Some(_), .. }, _) => {
                        bad("imputation perturbation and include_imputed are exclusive".into())
                    }
                    (_, Some(m)) if m.assets == 0 || !(m.fraction > 0.0 && m.fraction < 1.0) => {
                        bad("imputation mask: assets >= 1 and fraction in (0, 1) required".into())
                    }
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}
