use serde::{Deserialize, Serialize};

use super::{DistanceError, DistanceMatrix, DistanceMethod, DistanceParams};

/// Hazard used in place of a non-positive bootstrap result when flooring is
/// requested.
pub const INVERTED_FLOOR: f64 = 1e-6;

/// Piecewise-constant default intensity. `hazards[k]` applies on
/// `[tenors[k-1], tenors[k])` (with `tenors[-1] = 0`); the last hazard is
/// extended flat to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardCurve {
    tenors: Vec<f64>,
    hazards: Vec<f64>,
    recovery: f64,
}

impl HazardCurve {
    pub fn new(tenors: Vec<f64>, hazards: Vec<f64>, recovery: f64) -> Result<Self, DistanceError> {
        let bad = |m: String| Err(DistanceError::InvalidCurve(m));
        if tenors.is_empty() || tenors.len() != hazards.len() {
            return bad(format!("{} tenors for {} hazards", tenors.len(), hazards.len()));
        }
        if !(0.0..1.0).contains(&recovery) {
            return bad(format!("recovery {recovery} outside [0, 1)"));
        }
        let mut prev = 0.0;
        for &t in &tenors {
            if !(t.is_finite() && t > prev) {
                return bad("tenors must be positive and strictly increasing".into());
            }
            prev = t;
        }
        if hazards.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return bad("hazards must be positive".into());
        }
        Ok(Self { tenors, hazards, recovery })
    }

    pub fn tenors(&self) -> &[f64] {
        &self.tenors
    }

    pub fn hazards(&self) -> &[f64] {
        &self.hazards
    }

    pub fn recovery(&self) -> f64 {
        self.recovery
    }

    /// Hazard in force at time `t >= 0`.
    pub fn hazard_at(&self, t: f64) -> f64 {
        let k = self.tenors[..self.tenors.len() - 1].partition_point(|&b| b <= t);
        self.hazards[k]
    }

    /// Integrated hazard `int_0^t lambda`.
    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        let last = self.hazards.len() - 1;
        for (k, &h) in self.hazards.iter().enumerate() {
            let end = if k == last { f64::INFINITY } else { self.tenors[k] };
            if t <= end {
                return acc + h * (t - start);
            }
            acc += h * (end - start);
            start = end;
        }
        acc
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.cumulative_hazard(t)).exp()
    }

    /// Default density `lambda(t) S(t)`.
    pub fn density(&self, t: f64) -> f64 {
        self.hazard_at(t) * self.survival(t)
    }

    /// Interior breakpoints where the hazard may jump.
    fn breakpoints(&self) -> &[f64] {
        &self.tenors[..self.tenors.len() - 1]
    }
}

/// Credit-triangle bootstrap. The average hazard to tenor `tau_k` is
/// `s_k / (1 - R)` (spread in decimal), and the hazard on each interval is
/// whatever makes the integrated hazard match:
/// `(L_k tau_k - L_{k-1} tau_{k-1}) / (tau_k - tau_{k-1})`.
///
/// An inverted curve producing a non-positive hazard is an error unless
/// `floor_inverted` is set, in which case the hazard is floored at
/// [`INVERTED_FLOOR`].
pub fn spreads_to_hazard(
    spreads_bp: &[f64],
    tenors: &[f64],
    recovery: f64,
    floor_inverted: bool,
) -> Result<HazardCurve, DistanceError> {
    if spreads_bp.len() != tenors.len() || tenors.is_empty() {
        return Err(DistanceError::InvalidCurve(format!("{} spreads for {} tenors", spreads_bp.len(), tenors.len())));
    }
    if let Some(s) = spreads_bp.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(DistanceError::InvalidCurve(format!("spread {s} must be positive")));
    }
    if !(0.0..1.0).contains(&recovery) {
        return Err(DistanceError::InvalidCurve(format!("recovery {recovery} outside [0, 1)")));
    }
    let lgd = 1.0 - recovery;
    let mut hazards = Vec::with_capacity(tenors.len());
    let (mut prev_t, mut prev_int) = (0.0, 0.0);
    for (&s, &t) in spreads_bp.iter().zip(tenors) {
        if t.is_nan() || t <= prev_t {
            return Err(DistanceError::InvalidCurve("tenors must be positive and strictly increasing".into()));
        }
        let avg = s / 10_000.0 / lgd;
        let integrated = avg * t;
        let mut h = (integrated - prev_int) / (t - prev_t);
        if h <= 0.0 {
            if !floor_inverted {
                return Err(DistanceError::InvertedCurve { tenor: t });
            }
            h = INVERTED_FLOOR;
        }
        hazards.push(h);
        prev_int = integrated;
        prev_t = t;
    }
    HazardCurve::new(tenors.to_vec(), hazards, recovery)
}

/// `int_0^inf sqrt(f_a f_b) dt` in closed form, clamped to `[0, 1]`.
///
/// On an interval `[t0, t1)` where both hazards are constant the integrand is
/// `sqrt(la lb Sa(t0) Sb(t0)) exp(-(la + lb)(t - t0) / 2)`.
pub fn term_structure_cosine(a: &HazardCurve, b: &HazardCurve) -> f64 {
    let mut cuts: Vec<f64> = a.breakpoints().iter().chain(b.breakpoints()).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(f64::INFINITY);

    let mut total = 0.0;
    let mut t0 = 0.0;
    let (mut ha, mut hb) = (0.0f64, 0.0f64); // integrated hazards at t0
    for t1 in cuts {
        let (la, lb) = (a.hazard_at(t0), b.hazard_at(t0));
        let rate = (la + lb) / 2.0;
        let amp = (la * lb).sqrt() * (-(ha + hb) / 2.0).exp();
        let frac = if t1.is_infinite() { 1.0 } else { -(-rate * (t1 - t0)).exp_m1() };
        total += amp * frac / rate;
        if t1.is_finite() {
            ha += la * (t1 - t0);
            hb += lb * (t1 - t0);
        }
        t0 = t1;
    }
    total.clamp(0.0, 1.0)
}

/// Angle `phi = arccos(int sqrt(f_a f_b))` between the square-root default
/// densities, in `[0, pi/2]`.
pub fn term_structure_distance(a: &HazardCurve, b: &HazardCurve) -> f64 {
    term_structure_cosine(a, b).acos()
}

pub fn term_structure_matrix(asset_ids: Vec<String>, curves: &[HazardCurve]) -> Result<DistanceMatrix, DistanceError> {
    if asset_ids.len() != curves.len() {
        return Err(DistanceError::InvalidMatrix(format!("{} ids for {} curves", asset_ids.len(), curves.len())));
    }
    let values = super::pairwise(curves.len(), |i, j| Ok(term_structure_distance(&curves[i], &curves[j])))?;
    DistanceMatrix::new(asset_ids, values, DistanceMethod::TermStructure, DistanceParams::default())
}
