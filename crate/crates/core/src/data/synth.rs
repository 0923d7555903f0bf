use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, PricePanel};

const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailMix {
    pub probability: f64,
    pub multiplier: f64,
}

impl Default for TailMix {
    fn default() -> Self {
        Self { probability: 0.0, multiplier: 1.0 }
    }
}

/// Half-open range `[start, end)` of variation steps with a raised common
/// factor loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressSegment {
    pub start: usize,
    pub end: usize,
}

impl StressSegment {
    pub fn contains(&self, t: usize) -> bool {
        (self.start..self.end).contains(&t)
    }
}

/// Parameters of the one-factor-plus-cluster-factor generator.
///
/// Variation of asset `i` (cluster `c`) at step `t`:
///
/// ```text
/// dX_i(t) = s_c * (mu + beta_t * F(t) + gamma * G_c(t) + sigma * eps_i(t))
/// ```
///
/// with `F`, `G_c`, `eps_i` i.i.d. standard normal, `beta_t` switching to
/// the stress loading inside stress segments, and each `eps` draw multiplied
/// by `tail_mix.multiplier` with probability `tail_mix.probability`. `s_c` is
/// the per-cluster scale (1 when `cluster_scales` is empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_assets: usize,
    /// Number of variation steps; the panel has `n_days + 1` prices.
    pub n_days: usize,
    pub n_clusters: usize,
    pub common_factor_weight: f64,
    pub cluster_factor_weight: f64,
    pub idiosyncratic_sigma: f64,
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub tail_mix: TailMix,
    #[serde(default)]
    pub stress_segments: Vec<StressSegment>,
    #[serde(default)]
    pub stress_common_factor_weight: Option<f64>,
    #[serde(default)]
    pub cluster_scales: Vec<f64>,
    #[serde(default = "default_base_level")]
    pub base_level: f64,
    #[serde(default = "default_start_date")]
    pub start_date: NaiveDate,
    #[serde(default)]
    pub seed: u64,
}

fn default_base_level() -> f64 {
    100.0
}

fn default_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2006, 1, 2).expect("valid date")
}

impl SyntheticSpec {
    pub fn new(n_assets: usize, n_days: usize, n_clusters: usize) -> Self {
        Self {
            n_assets,
            n_days,
            n_clusters,
            common_factor_weight: 0.0,
            cluster_factor_weight: 0.5,
            idiosyncratic_sigma: 1.0,
            mean: 0.0,
            tail_mix: TailMix::default(),
            stress_segments: Vec::new(),
            stress_common_factor_weight: None,
            cluster_scales: Vec::new(),
            base_level: default_base_level(),
            start_date: default_start_date(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidSpec(m));
        if self.n_assets < 2 {
            return bad(format!("n_assets = {} < 2", self.n_assets));
        }
        if self.n_days < 2 {
            return bad(format!("n_days = {} < 2", self.n_days));
        }
        if self.n_clusters == 0 || self.n_clusters > self.n_assets {
            return bad(format!("n_clusters = {} must be in 1..={}", self.n_clusters, self.n_assets));
        }
        let beta = self.common_factor_weight;
        let gamma = self.cluster_factor_weight;
        let stress = self.stress_common_factor_weight.unwrap_or(beta);
        for (name, w) in
            [("common_factor_weight", beta), ("cluster_factor_weight", gamma), ("stress_common_factor_weight", stress)]
        {
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return bad(format!("{name} = {w} outside [0, 1]"));
            }
        }
        if beta >= 1.0 {
            return bad(format!("common_factor_weight = {beta} must be < 1"));
        }
        if beta + gamma > 1.0 + 1e-12 {
            return bad(format!("common + cluster weight = {} > 1", beta + gamma));
        }
        if stress + gamma > 1.0 + 1e-12 {
            return bad(format!("stress common + cluster weight = {} > 1", stress + gamma));
        }
        if !(self.idiosyncratic_sigma.is_finite() && self.idiosyncratic_sigma > 0.0) {
            return bad(format!("idiosyncratic_sigma = {} must be > 0", self.idiosyncratic_sigma));
        }
        if !self.mean.is_finite() {
            return bad("mean must be finite".into());
        }
        let tm = self.tail_mix;
        if !(0.0..=1.0).contains(&tm.probability) || !(tm.multiplier.is_finite() && tm.multiplier > 0.0) {
            return bad(format!("tail_mix {tm:?} invalid"));
        }
        let mut segs = self.stress_segments.clone();
        segs.sort_by_key(|s| s.start);
        for s in &segs {
            if s.start >= s.end || s.end > self.n_days {
                return bad(format!("stress segment [{}, {}) outside [0, {})", s.start, s.end, self.n_days));
            }
        }
        if segs.windows(2).any(|w| w[1].start < w[0].end) {
            return bad("stress segments overlap".into());
        }
        if !self.cluster_scales.is_empty() {
            if self.cluster_scales.len() != self.n_clusters {
                return bad(format!("{} cluster_scales for {} clusters", self.cluster_scales.len(), self.n_clusters));
            }
            if self.cluster_scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return bad("cluster_scales must be positive".into());
            }
        }
        if !(self.base_level.is_finite() && self.base_level > 0.0) {
            return bad(format!("base_level = {} must be > 0", self.base_level));
        }
        Ok(())
    }

    /// Balanced contiguous assignment of assets to clusters.
    pub fn cluster_of(&self, asset: usize) -> usize {
        asset * self.n_clusters / self.n_assets
    }

    fn beta_at(&self, t: usize) -> f64 {
        match self.stress_common_factor_weight {
            Some(stress) if self.stress_segments.iter().any(|s| s.contains(t)) => stress,
            _ => self.common_factor_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPanel {
    pub panel: PricePanel,
    /// Ground-truth cluster of each asset.
    pub labels: Vec<usize>,
}

/// `count` consecutive weekdays starting at (or after) `start`.
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Draw a panel from `spec`. Factor paths come from stream 0 of a ChaCha8
/// generator seeded with `spec.seed`; asset `i` draws its idiosyncratic
/// noise from stream `i + 1`. A price path that touches zero or below is
/// redrawn (idiosyncratic part only) up to 100 times before giving up.
pub fn synthesize(spec: &SyntheticSpec) -> Result<SyntheticPanel, DataError> {
    spec.validate()?;
    let t = spec.n_days;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let common: Vec<f64> = (0..t).map(|_| rng.sample(StandardNormal)).collect();
    let cluster: Vec<Vec<f64>> =
        (0..spec.n_clusters).map(|_| (0..t).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let betas: Vec<f64> = (0..t).map(|s| spec.beta_at(s)).collect();

    let mut rows = Vec::with_capacity(spec.n_assets);
    let mut labels = Vec::with_capacity(spec.n_assets);
    for i in 0..spec.n_assets {
        let c = spec.cluster_of(i);
        let scale = spec.cluster_scales.get(c).copied().unwrap_or(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64 + 1);
        let mut attempt = 0;
        let row = loop {
            if attempt == MAX_REDRAWS {
                return Err(DataError::RedrawExhausted { asset: i, attempts: MAX_REDRAWS });
            }
            attempt += 1;
            let mut p = spec.base_level;
            let mut path = Vec::with_capacity(t + 1);
            path.push(p);
            let mut ok = true;
            for s in 0..t {
                let mut eps: f64 = rng.sample(StandardNormal);
                let u: f64 = rng.random();
                if u < spec.tail_mix.probability {
                    eps *= spec.tail_mix.multiplier;
                }
                let dx = scale
                    * (spec.mean
                        + betas[s] * common[s]
                        + spec.cluster_factor_weight * cluster[c][s]
                        + spec.idiosyncratic_sigma * eps);
                p += dx;
                if p <= 0.0 {
                    ok = false;
                }
                path.push(p);
            }
            if ok {
                break path;
            }
        };
        rows.push(row);
        labels.push(c);
    }

    let width = (spec.n_assets.max(1) - 1).to_string().len().max(3);
    let ids = (0..spec.n_assets).map(|i| format!("A{i:0width$}")).collect();
    let dates = business_days(spec.start_date, t + 1);
    let panel = PricePanel::new(ids, dates, rows)?;
    Ok(SyntheticPanel { panel, labels })
}
