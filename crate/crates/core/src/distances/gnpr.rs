use super::correlation::{rank_correlation, standardized_ranks};
use super::{pairwise, DistanceError, DistanceMatrix, DistanceMethod, DistanceParams};
use crate::data::VariationMatrix;

const NORMALIZATION_TOL: f64 = 1e-9;

/// Squared Hellinger distance `1/2 sum (sqrt p_k - sqrt q_k)^2`, in `[0, 1]`.
pub fn hellinger_sq(p: &[f64], q: &[f64]) -> Result<f64, DistanceError> {
    if p.len() != q.len() {
        return Err(DistanceError::LengthMismatch(p.len(), q.len()));
    }
    for h in [p, q] {
        let s: f64 = h.iter().sum();
        if h.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (s - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DistanceError::NotNormalized(s));
        }
    }
    let h: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum::<f64>() / 2.0;
    Ok(h.clamp(0.0, 1.0))
}

/// `ceil(sqrt(n))`, at least 2 and at most 100.
pub fn default_bins(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(2, 100)
}

/// Normalized histograms of `a` and `b` on `bins` equal-width bins spanning
/// the pooled `[min, max]` of both samples. The maximum falls in the last bin.
pub fn shared_histograms(a: &[f64], b: &[f64], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = a.iter().chain(b).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let width = hi - lo;
    let fill = |xs: &[f64]| {
        let mut h = vec![0.0; bins];
        for &x in xs {
            let k = if width > 0.0 { (((x - lo) / width) * bins as f64).floor() as usize } else { 0 };
            h[k.min(bins - 1)] += 1.0;
        }
        let n = xs.len() as f64;
        h.iter_mut().for_each(|c| *c /= n);
        h
    };
    (fill(a), fill(b))
}

/// `sqrt(theta * (1 - rho_S) / 2 + (1 - theta) * H^2)` where `rho_S` is the
/// Spearman correlation of the two rows and `H^2` the squared Hellinger
/// distance between their shared-bin histograms. `bins` defaults to
/// [`default_bins`] of the row length.
pub fn gnpr_distance(v: &VariationMatrix, theta: f64, bins: Option<usize>) -> Result<DistanceMatrix, DistanceError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(DistanceError::InvalidParam(format!("theta = {theta} outside [0, 1]")));
    }
    let t = v.n_cols();
    if t < 3 {
        return Err(DistanceError::TooShort { have: t, need: 3 });
    }
    let bins = bins.unwrap_or_else(|| default_bins(t));
    if bins < 2 {
        return Err(DistanceError::InvalidParam(format!("bins = {bins} < 2")));
    }
    let z = standardized_ranks(v)?;
    let rows = v.values();
    let values = pairwise(v.n_assets(), |i, j| {
        let rho = rank_correlation(&z[i], &z[j]);
        let corr_part = (1.0 - rho) / 2.0;
        let dist_part = if theta < 1.0 {
            let (p, q) = shared_histograms(&rows[i], &rows[j], bins);
            hellinger_sq(&p, &q)?
        } else {
            0.0
        };
        Ok((theta * corr_part + (1.0 - theta) * dist_part).max(0.0).sqrt())
    })?;
    DistanceMatrix::new(
        v.asset_ids().to_vec(),
        values,
        DistanceMethod::Gnpr,
        DistanceParams { theta: Some(theta), bins: Some(bins) },
    )
}
