use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PerturbError, MIN_PART_LEN};
use crate::data::{variations, PricePanel, VariationKind, VariationMatrix};

/// Horizons of 1 to 32 trading days.
pub const DEFAULT_SCALES: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// One variation matrix per scale, each with at least 3 columns.
pub fn multiscale_plan(
    panel: &PricePanel,
    scales: &[usize],
    kind: VariationKind,
) -> Result<Vec<VariationMatrix>, PerturbError> {
    scales
        .iter()
        .map(|&k| {
            let v = variations(panel, kind, k)?;
            if v.n_cols() < MIN_PART_LEN {
                return Err(PerturbError::PartTooShort { label: format!("scale {k}"), len: v.n_cols() });
            }
            Ok(v)
        })
        .collect()
}

/// Years in a tenor label such as `5y` or `6m`.
pub fn tenor_years(label: &str) -> Option<f64> {
    let label = label.trim().to_ascii_lowercase();
    let (num, unit) = label.split_at(label.len().checked_sub(1)?);
    let n: f64 = num.parse().ok()?;
    match unit {
        "y" => Some(n),
        "m" => Some(n / 12.0),
        _ => None,
    }
}

/// Check that every maturity panel covers the same assets and dates and
/// order them by tenor (labels that are not tenors sort last).
pub fn maturity_split(panels: &BTreeMap<String, PricePanel>) -> Result<Vec<(String, PricePanel)>, PerturbError> {
    let mut entries: Vec<(String, PricePanel)> = panels.iter().map(|(m, p)| (m.clone(), p.clone())).collect();
    let Some((ref_m, reference)) = entries.first().cloned() else {
        return Err(PerturbError::Alignment("no maturity panels".into()));
    };
    let mut problems = Vec::new();
    for (m, p) in &entries[1..] {
        for id in reference.asset_ids() {
            if p.index_of(id).is_none() {
                problems.push(format!("asset '{id}' missing in {m}"));
            }
        }
        for id in p.asset_ids() {
            if reference.index_of(id).is_none() {
                problems.push(format!("asset '{id}' missing in {ref_m}"));
            }
        }
        if p.asset_ids() != reference.asset_ids() && problems.is_empty() {
            problems.push(format!("asset order differs between {ref_m} and {m}"));
        }
        if p.dates() != reference.dates() {
            problems.push(format!("dates differ between {ref_m} and {m}"));
        }
    }
    if !problems.is_empty() {
        return Err(PerturbError::Alignment(problems.join("; ")));
    }
    entries.sort_by(|(a, _), (b, _)| match (tenor_years(a), tenor_years(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cmp(b),
    });
    Ok(entries)
}

/// Uniform subset of `round(keep_fraction * N)` assets without replacement,
/// returned as indices in original order.
pub fn population_resample(asset_ids: &[String], keep_fraction: f64, seed: u64) -> Result<Vec<usize>, PerturbError> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(PerturbError::InvalidParam(format!("keep_fraction {keep_fraction} outside (0, 1]")));
    }
    let n = asset_ids.len();
    let size = (keep_fraction * n as f64).round() as usize;
    if size < 4 {
        return Err(PerturbError::SubsetTooSmall { size, min: 4 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, size).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::business_days;
    use chrono::NaiveDate;

    fn panel(n: usize, t: usize) -> PricePanel {
        let ids = (0..n).map(|i| format!("a{i}")).collect();
        let dates = business_days(NaiveDate::from_ymd_opt(2006, 1, 2).unwrap(), t);
        let rows = (0..n).map(|i| (0..t).map(|j| 100.0 + i as f64 + (j % 7) as f64).collect()).collect();
        PricePanel::new(ids, dates, rows).unwrap()
    }

    #[test]
    fn multiscale_lengths() {
        let p = panel(3, 65);
        let plan = multiscale_plan(&p, &[1], VariationKind::Diff).unwrap();
        assert_eq!(plan[0], variations(&p, VariationKind::Diff, 1).unwrap());
        assert!(matches!(
            multiscale_plan(&p, &[32], VariationKind::Diff),
            Err(PerturbError::PartTooShort { len: 2, .. })
        ));
        let long = panel(2, 2301);
        let plan = multiscale_plan(&long, &DEFAULT_SCALES, VariationKind::LogDiff).unwrap();
        assert_eq!(plan.last().unwrap().n_cols(), 71);
        assert_eq!(plan.iter().map(|v| v.scale()).collect::<Vec<_>>(), DEFAULT_SCALES);
    }

    #[test]
    fn tenor_parsing() {
        assert_eq!(tenor_years("5y"), Some(5.0));
        assert_eq!(tenor_years("6m"), Some(0.5));
        assert_eq!(tenor_years("10Y"), Some(10.0));
        assert_eq!(tenor_years("senior"), None);
        assert_eq!(tenor_years(""), None);
    }

    #[test]
    fn maturities_in_tenor_order() {
        let mut m = BTreeMap::new();
        for k in ["10y", "1y", "3y", "7y", "5y"] {
            m.insert(k.to_string(), panel(4, 10).with_maturity(k));
        }
        let out = maturity_split(&m).unwrap();
        let order: Vec<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(order, ["1y", "3y", "5y", "7y", "10y"]);
    }

    #[test]
    fn single_maturity_passthrough() {
        let mut m = BTreeMap::new();
        m.insert("5y".to_string(), panel(4, 10));
        let out = maturity_split(&m).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1, panel(4, 10));
    }

    #[test]
    fn misaligned_maturities_name_the_asset() {
        let mut m = BTreeMap::new();
        m.insert("1y".to_string(), panel(4, 10));
        m.insert("5y".to_string(), panel(4, 10).select_assets(&[0, 1, 3]).unwrap());
        let err = maturity_split(&m).unwrap_err().to_string();
        assert!(err.contains("'a2'"), "{err}");
    }

    #[test]
    fn resample_basics() {
        let ids: Vec<String> = (0..100).map(|i| i.to_string()).collect();
        assert_eq!(population_resample(&ids, 1.0, 1).unwrap(), (0..100).collect::<Vec<_>>());
        let a = population_resample(&ids, 0.8, 42).unwrap();
        assert_eq!(a, population_resample(&ids, 0.8, 42).unwrap());
        assert_eq!(a.len(), 80);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(population_resample(&ids[..6], 0.5, 0), Err(PerturbError::SubsetTooSmall { size: 3, .. })));
        assert!(population_resample(&ids, 0.0, 0).is_err());
    }

    #[test]
    fn resample_inclusion_frequency() {
        let ids: Vec<String> = (0..100).map(|i| i.to_string()).collect();
        let mut counts = [0usize; 100];
        for seed in 0..1000 {
            for i in population_resample(&ids, 0.8, seed).unwrap() {
                counts[i] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / 1000.0;
            assert!((f - 0.8).abs() <= 0.04, "frequency {f}");
        }
    }
}
