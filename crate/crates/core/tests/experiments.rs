use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use clustab::clustering::{cut_to_k, wpgma_linkage};
use clustab::data::{business_days, synthesize, variations, SyntheticSpec, VariationKind};
use clustab::distances::{self, DistanceMethod, DistanceParams};
use clustab::stability::{run_experiment, write_outputs, ExperimentConfig, PerturbationConfig, StabilityReport};
use clustab::Error;

fn spec() -> SyntheticSpec {
    SyntheticSpec {
        common_factor_weight: 0.2,
        cluster_factor_weight: 0.7,
        idiosyncratic_sigma: 0.3,
        base_level: 1000.0,
        seed: 5,
        ..SyntheticSpec::new(16, 400, 3)
    }
}

fn config(method: &str, perturbation: serde_json::Value) -> ExperimentConfig {
    let text = serde_json::json!({
        "experiment": "t",
        "input": {"synthetic": spec()},
        "distance": {"method": method},
        "clustering": {"k": 3},
        "perturbation": perturbation,
    });
    ExperimentConfig::from_json(&text.to_string()).unwrap()
}

#[test]
fn no_op_matches_direct_pipeline() {
    for method in ["pearson", "spearman", "euclidean", "gnpr"] {
        let cfg = config(method, serde_json::json!({"type": "none"}));
        let report = run_experiment(&cfg).unwrap().report;
        let m: DistanceMethod = method.parse().unwrap();
        let kind = if matches!(m, DistanceMethod::Pearson | DistanceMethod::Euclidean) {
            VariationKind::LogDiff
        } else {
            VariationKind::Diff
        };
        let v = variations(&synthesize(&spec()).unwrap().panel, kind, 1).unwrap();
        let d = distances::compute(&v, m, DistanceParams::default()).unwrap();
        let direct = cut_to_k(&wpgma_linkage(&d).unwrap(), 3).unwrap();
        assert_eq!(report.partition("full").unwrap(), direct, "{method}");
        assert_eq!(report.ari.matrix, vec![vec![1.0]]);
        assert_eq!(report.preprocessing.unwrap().kind, kind);
    }
}

#[test]
fn full_width_window_is_a_single_part() {
    let cfg = config("gnpr", serde_json::json!({"type": "sliding_window", "window": 400, "step": 1}));
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.ari.labels, ["win@0"]);
    assert_eq!(report.ari.matrix, vec![vec![1.0]]);
}

#[test]
fn ari_matrix_is_symmetric_with_unit_diagonal() {
    let cfg = config("spearman", serde_json::json!({"type": "sliding_window", "window": 100, "step": 50}));
    let report = run_experiment(&cfg).unwrap().report;
    let m = &report.ari.matrix;
    assert_eq!(m.len(), 7);
    for (i, row) in m.iter().enumerate() {
        assert_eq!(row[i], 1.0);
        for (j, &x) in row.iter().enumerate() {
            assert_eq!(x, m[j][i]);
            assert!((-1.0..=1.0).contains(&x));
        }
    }
    let truth = report.ground_truth_ari.as_ref().unwrap();
    assert_eq!(truth.len(), 7);
}

#[test]
fn runs_are_byte_identical() {
    let cfg = config("gnpr", serde_json::json!({"type": "odd_even"}));
    let a = run_experiment(&cfg).unwrap().report.to_json().unwrap();
    let b = run_experiment(&cfg).unwrap().report.to_json().unwrap();
    assert_eq!(a, b);
    let back = StabilityReport::from_json(&a).unwrap();
    assert_eq!(back.to_json().unwrap(), a);
}

#[test]
fn kind_override_is_honoured() {
    let mut cfg = config("pearson", serde_json::json!({"type": "none"}));
    cfg.preprocessing.kind = Some(VariationKind::Diff);
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.preprocessing.unwrap().kind, VariationKind::Diff);
}

#[test]
fn population_resample_compares_on_shared_assets() {
    let cfg = config(
        "gnpr",
        serde_json::json!({"type": "population_resample", "keep_fraction": 0.75, "draws": 3, "seed": 10}),
    );
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.ari.labels, ["full", "sample@10", "sample@11", "sample@12"]);
    for p in &report.parts[1..] {
        assert_eq!(p.assets.as_ref().unwrap().len(), 12);
    }
    assert!(report.parts[0].assets.is_none());
    assert_eq!(report.provenance.seed, Some(5));
}

#[test]
fn imputation_on_masked_synthetic_assets() {
    let cfg = config(
        "spearman",
        serde_json::json!({"type": "imputation", "noise_sigma": 0.1, "seed": 3, "mask": {"assets": 3, "fraction": 0.5}}),
    );
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.ari.labels, ["complete", "with_imputed"]);
    assert_eq!(report.assets.len(), 16);
    assert_eq!(report.parts[0].assets.as_ref().unwrap().len(), 13);
    assert!(report.ari.matrix[0][1] > 0.5, "{:?}", report.ari.matrix);
}

#[test]
fn multiscale_labels_parts_by_scale() {
    let cfg = config("pearson", serde_json::json!({"type": "multiscale", "scales": [1, 4, 16]}));
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.ari.labels, ["scale=1", "scale=4", "scale=16"]);
    assert_eq!(report.parts[2].scale, Some(16));
}

#[test]
fn regimes_from_calendar_dates() {
    let cfg = config("gnpr", serde_json::json!({"type": "regimes", "breakpoints": ["2006-06-01", "2007-01-01"]}));
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.parts.len(), 3);
    let first = report.parts[1].date_range.unwrap()[0];
    assert!(first >= NaiveDate::from_ymd_opt(2006, 6, 1).unwrap());
}

#[test]
fn failing_part_is_named() {
    // k larger than the subsample of assets fails inside the resampled parts
    let mut cfg = config(
        "gnpr",
        serde_json::json!({"type": "population_resample", "keep_fraction": 0.25, "draws": 1, "seed": 0}),
    );
    cfg.clustering.k = 6;
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, Error::Part { ref label, .. } if label == "sample@0"), "{err}");
    assert!(err.to_string().contains("clustering"), "{err}");
}

fn write_csv(path: &Path, ids: &[&str], dates: &[NaiveDate], rows: &[Vec<Option<f64>>]) {
    let mut s = String::from("date");
    for id in ids {
        write!(s, ",{id}").unwrap();
    }
    s.push('\n');
    for (t, d) in dates.iter().enumerate() {
        write!(s, "{d}").unwrap();
        for row in rows {
            match row[t] {
                Some(v) => write!(s, ",{v}").unwrap(),
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn csv_input_with_imputed_assets() {
    let dir = tempfile::tempdir().unwrap();
    let synth = synthesize(&spec()).unwrap();
    let panel = &synth.panel;
    let ids: Vec<&str> = panel.asset_ids().iter().map(String::as_str).collect();
    let mut rows: Vec<Vec<Option<f64>>> =
        (0..panel.n_assets()).map(|i| panel.row(i).iter().map(|&v| Some(v)).collect()).collect();
    for row in rows.iter_mut().skip(14) {
        row[..100].iter_mut().for_each(|v| *v = None);
    }
    write_csv(&dir.path().join("panel.csv"), &ids, panel.dates(), &rows);

    let base = serde_json::json!({
        "experiment": "csv",
        "input": {"csv": {"path": "panel.csv"}},
        "distance": {"method": "gnpr"},
        "clustering": {"k": 3},
        "perturbation": {"type": "odd_even"}
    });
    let cfg_path = dir.path().join("exp.json");
    std::fs::write(&cfg_path, base.to_string()).unwrap();
    let report = run_experiment(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap().report;
    assert_eq!(report.assets.len(), 14);
    assert!(report.ground_truth_ari.is_none());
    assert_eq!(report.provenance.input_hash.len(), 64);

    let mut with = base.clone();
    with["input"]["csv"]["include_imputed"] = serde_json::json!({"noise_sigma": 0.0});
    std::fs::write(&cfg_path, with.to_string()).unwrap();
    let report = run_experiment(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap().report;
    assert_eq!(report.assets.len(), 16);

    let mut imp = base;
    imp["perturbation"] = serde_json::json!({"type": "imputation"});
    std::fs::write(&cfg_path, imp.to_string()).unwrap();
    let out = run_experiment(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap();
    assert_eq!(out.report.ari.labels, ["complete", "with_imputed"]);

    let out_dir = dir.path().join("out");
    write_outputs(&out, &out_dir).unwrap();
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("sankey_00_complete__with_imputed.svg").exists());
    assert!(out_dir.join("distances/01_with_imputed.csv").exists());
    assert!(out_dir.join("partitions/00_complete.json").exists());
}

/// Five tenors of a toy CDS panel: spreads rise with maturity, two groups of
/// issuers with different curve shapes.
fn write_maturities(dir: &Path) {
    let dates = business_days(NaiveDate::from_ymd_opt(2008, 1, 1).unwrap(), 40);
    let ids = ["C0", "C1", "C2", "C3", "C4", "C5"];
    for (m, tenor) in [("1y", 1.0), ("3y", 3.0), ("5y", 5.0), ("7y", 7.0), ("10y", 10.0)] {
        let rows: Vec<Vec<Option<f64>>> = (0..6)
            .map(|i| {
                let steep = if i < 3 { 10.0 } else { 40.0 };
                (0..40)
                    .map(|t| Some(50.0 + steep * f64::sqrt(tenor) + i as f64 + ((t * (i + 2)) % 11) as f64))
                    .collect()
            })
            .collect();
        write_csv(&dir.join(format!("cds_{m}.csv")), &ids, &dates, &rows);
    }
}

#[test]
fn maturities_and_term_structure() {
    let dir = tempfile::tempdir().unwrap();
    write_maturities(dir.path());
    let mk = |method: &str, perturbation: serde_json::Value| {
        let text = serde_json::json!({
            "experiment": "cds",
            "input": {"maturities": {"dir": dir.path(), "stem": "cds"}},
            "distance": {"method": method},
            "clustering": {"k": 2},
            "perturbation": perturbation
        });
        ExperimentConfig::from_json(&text.to_string()).unwrap()
    };
    let report = run_experiment(&mk("spearman", serde_json::json!({"type": "maturities"}))).unwrap().report;
    assert_eq!(report.ari.labels, ["1y", "3y", "5y", "7y", "10y"]);

    let report = run_experiment(&mk(
        "term_structure",
        serde_json::json!({"type": "term_structure", "dates": ["2008-01-01", "2008-02-01"]}),
    ))
    .unwrap()
    .report;
    assert_eq!(report.ari.labels, ["2008-01-01", "2008-02-01"]);
    assert!(report.preprocessing.is_none());
    let p = report.partition("2008-01-01").unwrap();
    assert_eq!(p.labels(), [0, 0, 0, 1, 1, 1]);
    assert_eq!(report.ari.matrix[0][1], 1.0);
}

#[test]
fn config_errors_are_config_errors() {
    let text = r#"{"experiment": "x", "input": {"csv": {"path": "a.csv"}}, "distance": {"method": "gnpr"},
                  "clustering": {"k": 2}, "perturbation": {"type": "maturities"}}"#;
    assert!(ExperimentConfig::from_json(text).is_err());
    let text = r#"{"experiment": "x", "input": {"csv": {"path": "a.csv"}}, "distance": {"method": "term_structure"},
                  "clustering": {"k": 2}}"#;
    assert!(ExperimentConfig::from_json(text).is_err());
    let bad = PerturbationConfig::SlidingWindow { window: 2, step: 1 };
    let mut cfg = config("gnpr", serde_json::json!({"type": "none"}));
    cfg.perturbation = bad;
    assert!(run_experiment(&cfg).is_err());
}
