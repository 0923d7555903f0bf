use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{PerturbError, MIN_PART_LEN};
use crate::data::VariationMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPart {
    pub label: String,
    pub indices: Vec<usize>,
}

/// Named list of column-index sets over a variation matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSplit {
    pub name: String,
    pub parts: Vec<SplitPart>,
}

impl SampleSplit {
    pub fn new(name: impl Into<String>, t_count: usize, parts: Vec<SplitPart>) -> Result<Self, PerturbError> {
        for p in &parts {
            if p.indices.len() < MIN_PART_LEN {
                return Err(PerturbError::PartTooShort { label: p.label.clone(), len: p.indices.len() });
            }
            if p.indices.windows(2).any(|w| w[1] <= w[0]) || p.indices.last().is_some_and(|&l| l >= t_count) {
                return Err(PerturbError::InvalidParam(format!(
                    "part '{}' indices must be increasing and below {t_count}",
                    p.label
                )));
            }
        }
        Ok(Self { name: name.into(), parts })
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts.iter().map(|p| p.label.as_str()).collect()
    }
}

/// Windows `[t, t + window)` for `t = 0, step, 2 step, ...` while they fit.
pub fn sliding_windows(t_count: usize, window: usize, step: usize) -> Result<SampleSplit, PerturbError> {
    if window < MIN_PART_LEN {
        return Err(PerturbError::InvalidParam(format!("window {window} < {MIN_PART_LEN}")));
    }
    if step == 0 {
        return Err(PerturbError::InvalidParam("step must be >= 1".into()));
    }
    if window > t_count {
        return Err(PerturbError::WindowTooLarge { window, t_count });
    }
    let parts = (0..)
        .map(|i| i * step)
        .take_while(|t| t + window <= t_count)
        .map(|t| SplitPart { label: format!("win@{t}"), indices: (t..t + window).collect() })
        .collect();
    SampleSplit::new("sliding_window", t_count, parts)
}

/// "odd" holds the 1st, 3rd, ... trading days (indices 0, 2, ...), "even"
/// the 2nd, 4th, ...
pub fn odd_even(t_count: usize) -> Result<SampleSplit, PerturbError> {
    if t_count < 2 * MIN_PART_LEN {
        return Err(PerturbError::InvalidParam(format!("odd/even needs at least 6 columns, got {t_count}")));
    }
    let parts = vec![
        SplitPart { label: "odd".into(), indices: (0..t_count).step_by(2).collect() },
        SplitPart { label: "even".into(), indices: (1..t_count).step_by(2).collect() },
    ];
    SampleSplit::new("odd_even", t_count, parts)
}

fn regime_bounds(t_count: usize, breakpoints: &[usize]) -> Result<Vec<usize>, PerturbError> {
    let mut bounds = vec![0];
    for &b in breakpoints {
        if b == 0 || b == t_count {
            continue;
        }
        if b > t_count || b <= *bounds.last().expect("non-empty") {
            return Err(PerturbError::NonIncreasing(t_count));
        }
        bounds.push(b);
    }
    bounds.push(t_count);
    Ok(bounds)
}

/// Contiguous regimes `[t_i, t_{i+1})`. Outer bounds `0` and `t_count` are
/// implied.
pub fn regimes(t_count: usize, breakpoints: &[usize]) -> Result<SampleSplit, PerturbError> {
    let bounds = regime_bounds(t_count, breakpoints)?;
    let parts = bounds
        .windows(2)
        .map(|w| SplitPart { label: format!("[{},{})", w[0], w[1]), indices: (w[0]..w[1]).collect() })
        .collect();
    SampleSplit::new("regimes", t_count, parts)
}

/// Regimes from calendar breakpoints: each maps to the first column whose
/// date is on or after it. Parts are labelled by their first and last date.
pub fn regimes_from_dates(dates: &[NaiveDate], breakpoints: &[NaiveDate]) -> Result<SampleSplit, PerturbError> {
    let t_count = dates.len();
    let mut idx: Vec<usize> = breakpoints.iter().map(|b| dates.partition_point(|d| d < b)).collect();
    // breakpoints outside the sample collapse onto the outer bounds
    idx.dedup();
    let bounds = regime_bounds(t_count, &idx)?;
    let parts = bounds
        .windows(2)
        .map(|w| SplitPart { label: format!("{}..{}", dates[w[0]], dates[w[1] - 1]), indices: (w[0]..w[1]).collect() })
        .collect();
    SampleSplit::new("regimes", t_count, parts)
}

/// Linear-interpolation quantile (R type 7) of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Split columns on the cross-sectional mean `m_t`: "tails" are the columns
/// with `m_t <= Q1` or `m_t >= Q3`, "heart" the rest.
pub fn heart_tails(v: &VariationMatrix) -> Result<SampleSplit, PerturbError> {
    let t_count = v.n_cols();
    if t_count < 8 {
        return Err(PerturbError::InvalidParam(format!("heart/tails needs at least 8 columns, got {t_count}")));
    }
    let n = v.n_assets() as f64;
    let mean: Vec<f64> = (0..t_count).map(|t| v.values().iter().map(|r| r[t]).sum::<f64>() / n).collect();
    let mut sorted = mean.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[t_count - 1] {
        return Err(PerturbError::Degenerate("market mean series is constant".into()));
    }
    let (q1, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.75));
    let (tails, heart): (Vec<usize>, Vec<usize>) = (0..t_count).partition(|&t| mean[t] <= q1 || mean[t] >= q3);
    SampleSplit::new(
        "heart_tails",
        t_count,
        vec![SplitPart { label: "tails".into(), indices: tails }, SplitPart { label: "heart".into(), indices: heart }],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn starts(s: &SampleSplit) -> Vec<(usize, usize)> {
        s.parts.iter().map(|p| (p.indices[0], *p.indices.last().unwrap() + 1)).collect()
    }

    #[test]
    fn sliding_examples() {
        assert_eq!(starts(&sliding_windows(10, 5, 5).unwrap()), [(0, 5), (5, 10)]);
        assert_eq!(starts(&sliding_windows(10, 5, 2).unwrap()), [(0, 5), (2, 7), (4, 9)]);
        let whole = sliding_windows(10, 10, 1).unwrap();
        assert_eq!(whole.parts.len(), 1);
        assert_eq!(whole.parts[0].label, "win@0");
        assert!(matches!(sliding_windows(10, 11, 1), Err(PerturbError::WindowTooLarge { .. })));
        assert!(sliding_windows(10, 2, 1).is_err());
        assert!(sliding_windows(10, 5, 0).is_err());
    }

    #[test]
    fn odd_even_examples() {
        let s = odd_even(6).unwrap();
        assert_eq!(s.parts[0].indices, [0, 2, 4]);
        assert_eq!(s.parts[1].indices, [1, 3, 5]);
        let s = odd_even(7).unwrap();
        assert_eq!(s.parts[0].indices, [0, 2, 4, 6]);
        assert_eq!(s.parts[1].indices, [1, 3, 5]);
        assert!(odd_even(5).is_err());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(starts(&regimes(10, &[5]).unwrap()), [(0, 5), (5, 10)]);
        assert_eq!(starts(&regimes(10, &[]).unwrap()), [(0, 10)]);
        assert_eq!(starts(&regimes(10, &[0, 5, 10]).unwrap()), [(0, 5), (5, 10)]);
        assert!(matches!(regimes(10, &[6, 4]), Err(PerturbError::NonIncreasing(_))));
        assert!(matches!(regimes(10, &[2]), Err(PerturbError::PartTooShort { .. })));
    }

    #[test]
    fn heart_tails_on_ramp() {
        let rows = vec![(1..=8).map(f64::from).collect::<Vec<_>>(); 2];
        let v = VariationMatrix::from_rows(vec!["a".into(), "b".into()], rows).unwrap();
        let mut sorted: Vec<f64> = (1..=8).map(f64::from).collect();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(quantile(&sorted, 0.25), 2.75);
        assert_eq!(quantile(&sorted, 0.75), 6.25);
        let s = heart_tails(&v).unwrap();
        assert_eq!(s.parts[0].indices, [0, 1, 6, 7]);
        assert_eq!(s.parts[1].indices, [2, 3, 4, 5]);
    }

    #[test]
    fn heart_tails_degenerate() {
        let v = VariationMatrix::from_rows(vec!["a".into(), "b".into()], vec![vec![1.0; 8], vec![2.0; 8]]).unwrap();
        assert!(matches!(heart_tails(&v), Err(PerturbError::Degenerate(_))));
    }

    fn mean_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (8usize..60).prop_flat_map(|t| prop::collection::vec(prop::collection::vec(-3.0f64..3.0, t), 2..5))
    }

    proptest! {
        #[test]
        fn odd_even_partitions_columns(t in 6usize..500) {
            let s = odd_even(t).unwrap();
            let mut all: Vec<usize> = s.parts.iter().flat_map(|p| p.indices.clone()).collect();
            all.sort();
            prop_assert_eq!(all, (0..t).collect::<Vec<_>>());
        }

        #[test]
        fn windows_tile_or_overlap(t in 3usize..200, w in 3usize..50, s in 1usize..50) {
            prop_assume!(w <= t);
            let split = sliding_windows(t, w, s).unwrap();
            for pair in split.parts.windows(2) {
                let a: std::collections::BTreeSet<_> = pair[0].indices.iter().collect();
                let overlap = pair[1].indices.iter().filter(|i| a.contains(i)).count();
                prop_assert_eq!(overlap, w.saturating_sub(s));
            }
            let last = split.parts.last().unwrap();
            prop_assert!(last.indices[0] + s + w > t);
        }

        #[test]
        fn heart_tails_partitions_and_is_shift_invariant(rows in mean_rows(), c in -2.0f64..2.0) {
            let ids: Vec<String> = (0..rows.len()).map(|i| i.to_string()).collect();
            let v = VariationMatrix::from_rows(ids.clone(), rows.clone()).unwrap();
            let Ok(s) = heart_tails(&v) else { return Ok(()); };
            let mut all: Vec<usize> = s.parts.iter().flat_map(|p| p.indices.clone()).collect();
            all.sort();
            prop_assert_eq!(all, (0..v.n_cols()).collect::<Vec<_>>());

            // shift by a dyadic constant so the mean moves exactly
            let c = (c * 8.0).round() / 8.0;
            let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x + c).collect()).collect();
            let s2 = heart_tails(&VariationMatrix::from_rows(ids, shifted).unwrap()).unwrap();
            prop_assert_eq!(s, s2);
        }
    }
}
