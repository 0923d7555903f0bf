use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, InputConfig, MaskConfig, PerturbationConfig};
use super::report::{
    common_restriction, file_safe, AriMatrix, ClusteringSpec, DistanceSpec, PartRecord, Preprocessing, Provenance,
    StabilityReport,
};
use super::{ari, StabilityError};
use crate::clustering::{cut_to_k, wpgma_linkage, Dendrogram, Partition};
use crate::data::{
    impute_proxy, load_csv, load_maturity_csvs, synthesize, variations, PartialSeries, PricePanel, VariationKind,
    VariationMatrix,
};
use crate::distances::{self, pearson, spreads_to_hazard, term_structure_matrix, DistanceMatrix, DistanceMethod};
use crate::perturbations::{
    heart_tails, maturity_split, multiscale_plan, odd_even, population_resample, regimes, regimes_from_dates,
    sliding_windows, tenor_years, SampleSplit,
};
use crate::report::SvgStyle;
use crate::{Error, Result};

/// Everything a run produces; the report plus the intermediate matrices.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: StabilityReport,
    pub distances: Vec<DistanceMatrix>,
    pub dendrograms: Vec<Dendrogram>,
    pub partitions: Vec<Partition>,
}

struct Input {
    panel: Option<PricePanel>,
    maturities: BTreeMap<String, PricePanel>,
    partial: Vec<PartialSeries>,
    truth: Option<Partition>,
    hash: String,
    seed: Option<u64>,
}

enum PartData {
    Variations(VariationMatrix),
    Distances(DistanceMatrix),
}

struct PlannedPart {
    record: PartRecord,
    data: PartData,
}

fn sha256_hex(chunks: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for c in chunks {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c);
    }
    hex::encode(h.finalize())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn maturity_files(dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let prefix = format!("{stem}_");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix(&prefix))
                .and_then(|n| n.strip_suffix(".csv"))
                .is_some_and(|m| !m.is_empty())
        })
        .collect();
    files.sort();
    Ok(files)
}

fn load_input(cfg: &ExperimentConfig) -> Result<Input> {
    match &cfg.input {
        InputConfig::Synthetic(spec) => {
            let synth = synthesize(spec)?;
            let truth = Partition::canonical(synth.panel.asset_ids().to_vec(), &synth.labels)?;
            Ok(Input {
                panel: Some(synth.panel),
                maturities: BTreeMap::new(),
                partial: Vec::new(),
                truth: Some(truth),
                hash: sha256_hex(&[&serde_json::to_vec(spec)?]),
                seed: Some(spec.seed),
            })
        }
        InputConfig::Csv { path, .. } => {
            let path = cfg.resolve(path);
            let loaded = load_csv(&path)?;
            Ok(Input {
                panel: Some(loaded.panel),
                maturities: BTreeMap::new(),
                partial: loaded.partial,
                truth: None,
                hash: sha256_hex(&[&read_bytes(&path)?]),
                seed: None,
            })
        }
        InputConfig::Maturities { dir, stem } => {
            let dir = cfg.resolve(dir);
            let loaded = load_maturity_csvs(&dir, stem)?;
            let mut chunks = Vec::new();
            for f in maturity_files(&dir, stem)? {
                chunks.push(f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default().into_bytes());
                chunks.push(read_bytes(&f)?);
            }
            let refs: Vec<&[u8]> = chunks.iter().map(Vec::as_slice).collect();
            Ok(Input {
                panel: None,
                maturities: loaded.into_iter().map(|(m, l)| (m, l.panel)).collect(),
                partial: Vec::new(),
                truth: None,
                hash: sha256_hex(&refs),
                seed: None,
            })
        }
    }
}

/// Hide the first `fraction` of dates of the last `assets` assets.
fn mask_panel(panel: &PricePanel, mask: &MaskConfig) -> Result<(PricePanel, Vec<PartialSeries>)> {
    let n = panel.n_assets();
    if mask.assets + 2 > n {
        return Err(StabilityError::Config(format!("mask of {} assets leaves fewer than 2 of {n}", mask.assets)).into());
    }
    let hidden = ((panel.n_dates() as f64 * mask.fraction).round() as usize).min(panel.n_dates() - 1);
    let keep: Vec<usize> = (0..n - mask.assets).collect();
    let partial = (n - mask.assets..n)
        .map(|i| PartialSeries {
            asset_id: panel.asset_ids()[i].clone(),
            values: panel.row(i).iter().enumerate().map(|(t, &v)| (t >= hidden).then_some(v)).collect(),
        })
        .collect();
    Ok((panel.select_assets(&keep)?, partial))
}

/// Donors for a partial series: the cluster whose members' observed-suffix
/// differences correlate best on average with the series' own. Suffixes
/// too short to correlate fall back to the largest cluster.
fn donor_cluster(panel: &PricePanel, clusters: &Partition, partial: &PartialSeries) -> Result<Vec<String>> {
    let first = partial.first_observed()?;
    let observed: Vec<f64> = partial.values[first..].iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let own: Vec<f64> = observed.windows(2).map(|w| w[1] - w[0]).collect();
    let members = clusters.clusters();
    let mut best: Option<(f64, usize)> = None;
    if own.len() >= 3 && own.iter().all(|x| x.is_finite()) {
        for (c, m) in members.iter().enumerate() {
            let rs: Vec<f64> = m
                .iter()
                .filter_map(|&i| {
                    let d: Vec<f64> = panel.row(i)[first..].windows(2).map(|w| w[1] - w[0]).collect();
                    pearson(&own, &d)
                })
                .collect();
            if rs.is_empty() {
                continue;
            }
            let score = rs.iter().sum::<f64>() / rs.len() as f64;
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, c));
            }
        }
    }
    let chosen = match best {
        Some((_, c)) => c,
        None => {
            let sizes = clusters.sizes();
            (0..sizes.len()).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap_or(0)
        }
    };
    Ok(members[chosen].iter().map(|&i| panel.asset_ids()[i].clone()).collect())
}

fn cluster_variations(v: &VariationMatrix, cfg: &ExperimentConfig) -> Result<Partition> {
    let d = distances::compute(v, cfg.distance.method, cfg.distance.params)?;
    Ok(cut_to_k(&wpgma_linkage(&d)?, cfg.clustering.k)?)
}

/// Append imputed versions of `partial` to `panel`, donors picked from a
/// clustering of the complete assets.
fn augment(
    panel: &PricePanel,
    partial: &[PartialSeries],
    cfg: &ExperimentConfig,
    noise_sigma: f64,
    seed: u64,
) -> Result<PricePanel> {
    let base = cluster_variations(&variations(panel, cfg.kind(), cfg.preprocessing.scale)?, cfg)?;
    let mut out = panel.clone();
    for (i, p) in partial.iter().enumerate() {
        let donors = donor_cluster(panel, &base, p)?;
        out = impute_proxy(&out, p, &donors, noise_sigma, seed.wrapping_add(i as u64))?;
    }
    Ok(out)
}

fn split_parts(v: &VariationMatrix, split: SampleSplit) -> Result<Vec<PlannedPart>> {
    split
        .parts
        .into_iter()
        .map(|p| {
            let sub = v.select_columns(&p.indices)?;
            let date_range = match (sub.dates().first(), sub.dates().last()) {
                (Some(&a), Some(&b)) => Some([a, b]),
                _ => None,
            };
            Ok(PlannedPart {
                record: PartRecord { label: p.label, indices: Some(p.indices), date_range, ..Default::default() },
                data: PartData::Variations(sub),
            })
        })
        .collect()
}

fn date_span(v: &VariationMatrix) -> Option<[chrono::NaiveDate; 2]> {
    Some([*v.dates().first()?, *v.dates().last()?])
}

fn plan(cfg: &ExperimentConfig, input: &mut Input) -> Result<Vec<PlannedPart>> {
    let kind = cfg.kind();
    let scale = cfg.preprocessing.scale;
    if let InputConfig::Csv { include_imputed: Some(imp), .. } = &cfg.input {
        if let Some(panel) = &input.panel {
            let augmented = augment(panel, &input.partial, cfg, imp.noise_sigma, imp.seed)?;
            input.panel = Some(augmented);
            input.partial.clear();
        }
    }

    match &cfg.perturbation {
        PerturbationConfig::Maturities {} => {
            let parts = maturity_split(&input.maturities)?;
            parts
                .into_iter()
                .map(|(m, p)| {
                    let v = variations(&p, kind, scale).map_err(|e| Error::from(e).in_part(&m))?;
                    Ok(PlannedPart {
                        record: PartRecord {
                            label: m.clone(),
                            date_range: date_span(&v),
                            maturity: Some(m),
                            ..Default::default()
                        },
                        data: PartData::Variations(v),
                    })
                })
                .collect()
        }
        PerturbationConfig::TermStructure { dates, recovery, floor_inverted } => {
            let aligned = maturity_split(&input.maturities)?;
            let tenors = aligned
                .iter()
                .map(|(m, _)| {
                    tenor_years(m)
                        .ok_or_else(|| StabilityError::Config(format!("maturity '{m}' is not a tenor such as 5y")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let reference = &aligned[0].1;
            let mut parts = Vec::new();
            for d in dates {
                let col = reference.dates().partition_point(|x| x < d);
                let Some(&actual) = reference.dates().get(col) else {
                    return Err(StabilityError::Config(format!("date {d} is after the last quote")).into());
                };
                let label = actual.to_string();
                let curves = (0..reference.n_assets())
                    .map(|i| {
                        let spreads: Vec<f64> = aligned.iter().map(|(_, p)| p.row(i)[col]).collect();
                        spreads_to_hazard(&spreads, &tenors, *recovery, *floor_inverted).map_err(|e| {
                            Error::from(StabilityError::Asset {
                                asset: reference.asset_ids()[i].clone(),
                                message: e.to_string(),
                            })
                            .in_part(&label)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let m = term_structure_matrix(reference.asset_ids().to_vec(), &curves)
                    .map_err(|e| Error::from(e).in_part(&label))?;
                parts.push(PlannedPart {
                    record: PartRecord {
                        label,
                        date_range: Some([actual, actual]),
                        indices: Some(vec![col]),
                        ..Default::default()
                    },
                    data: PartData::Distances(m),
                });
            }
            Ok(parts)
        }
        PerturbationConfig::Multiscale { scales } => {
            let panel = input.panel.as_ref().expect("validated");
            let plan = multiscale_plan(panel, scales, kind)?;
            Ok(plan
                .into_iter()
                .map(|v| PlannedPart {
                    record: PartRecord {
                        label: format!("scale={}", v.scale()),
                        date_range: date_span(&v),
                        scale: Some(v.scale()),
                        ..Default::default()
                    },
                    data: PartData::Variations(v),
                })
                .collect())
        }
        PerturbationConfig::PopulationResample { keep_fraction, draws, seed } => {
            let panel = input.panel.as_ref().expect("validated");
            let v = variations(panel, kind, scale)?;
            let mut parts = vec![PlannedPart {
                record: PartRecord { label: "full".into(), date_range: date_span(&v), ..Default::default() },
                data: PartData::Variations(v.clone()),
            }];
            for d in 0..*draws as u64 {
                let s = seed.wrapping_add(d);
                let keep = population_resample(v.asset_ids(), *keep_fraction, s)?;
                let sub = v.select_assets(&keep)?;
                parts.push(PlannedPart {
                    record: PartRecord {
                        label: format!("sample@{s}"),
                        date_range: date_span(&sub),
                        assets: Some(sub.asset_ids().to_vec()),
                        ..Default::default()
                    },
                    data: PartData::Variations(sub),
                });
            }
            Ok(parts)
        }
        PerturbationConfig::Imputation { noise_sigma, seed, mask } => {
            let full = input.panel.clone().expect("validated");
            let (complete, partial) = match mask {
                Some(m) => mask_panel(&full, m)?,
                None => (full, input.partial.clone()),
            };
            if partial.is_empty() {
                return Err(StabilityError::Config("imputation: no partial series to impute".into()).into());
            }
            let augmented = augment(&complete, &partial, cfg, *noise_sigma, *seed)?;
            let v_complete = variations(&complete, kind, scale)?;
            let v_aug = variations(&augmented, kind, scale)?;
            input.panel = Some(augmented);
            Ok(vec![
                PlannedPart {
                    record: PartRecord {
                        label: "complete".into(),
                        date_range: date_span(&v_complete),
                        assets: Some(v_complete.asset_ids().to_vec()),
                        ..Default::default()
                    },
                    data: PartData::Variations(v_complete),
                },
                PlannedPart {
                    record: PartRecord {
                        label: "with_imputed".into(),
                        date_range: date_span(&v_aug),
                        ..Default::default()
                    },
                    data: PartData::Variations(v_aug),
                },
            ])
        }
        time => {
            let panel = input.panel.as_ref().expect("validated");
            let v = variations(panel, kind, scale)?;
            let t = v.n_cols();
            let split = match time {
                PerturbationConfig::None {} => SampleSplit::new(
                    "none",
                    t,
                    vec![crate::perturbations::SplitPart { label: "full".into(), indices: (0..t).collect() }],
                )?,
                PerturbationConfig::SlidingWindow { window, step } => sliding_windows(t, *window, *step)?,
                PerturbationConfig::OddEven {} => odd_even(t)?,
                PerturbationConfig::Regimes { breakpoints, indices } if !breakpoints.is_empty() => {
                    regimes_from_dates(v.dates(), breakpoints)?
                }
                PerturbationConfig::Regimes { indices, .. } => regimes(t, indices)?,
                PerturbationConfig::HeartTails {} => heart_tails(&v)?,
                _ => unreachable!("handled above"),
            };
            split_parts(&v, split)
        }
    }
}

/// Run an experiment end to end. Parts are clustered in parallel; the
/// report does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut input = load_input(cfg)?;
    let planned = plan(cfg, &mut input)?;

    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = planned.iter().find(|p| !seen.insert(p.record.label.clone())) {
        return Err(StabilityError::DuplicateLabel(dup.record.label.clone()).into());
    }

    let results: Vec<(DistanceMatrix, Dendrogram, Partition)> = planned
        .par_iter()
        .map(|p| {
            let run = || -> Result<_> {
                let d = match &p.data {
                    PartData::Variations(v) => distances::compute(v, cfg.distance.method, cfg.distance.params)?,
                    PartData::Distances(d) => d.clone(),
                };
                let dend = wpgma_linkage(&d)?;
                let part = cut_to_k(&dend, cfg.clustering.k)?;
                Ok((d, dend, part))
            };
            run().map_err(|e| e.in_part(&p.record.label))
        })
        .collect::<Result<_>>()?;

    let labels: Vec<String> = planned.iter().map(|p| p.record.label.clone()).collect();
    let partitions: Vec<Partition> = results.iter().map(|r| r.2.clone()).collect();
    let n = partitions.len();
    let mut matrix = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (p, q) = common_restriction(&partitions[i], &partitions[j])
                .map_err(|e| Error::from(e).in_part(&format!("{} vs {}", labels[i], labels[j])))?;
            let a = ari(&p, &q)?;
            matrix[i][j] = a;
            matrix[j][i] = a;
        }
    }

    let ground_truth_ari = match &input.truth {
        Some(truth) => Some(
            labels
                .iter()
                .zip(&partitions)
                .map(|(l, p)| {
                    let t = truth.restrict(p.asset_ids())?;
                    Ok((l.clone(), ari(p, &t)?))
                })
                .collect::<Result<IndexMap<_, _>>>()?,
        ),
        None => None,
    };

    let assets: Vec<String> = match (&input.panel, input.maturities.values().next()) {
        (Some(p), _) => p.asset_ids().to_vec(),
        (None, Some(p)) => p.asset_ids().to_vec(),
        (None, None) => partitions[0].asset_ids().to_vec(),
    };
    let records: Vec<PartRecord> = planned
        .into_iter()
        .zip(&partitions)
        .map(|(p, part)| {
            let mut r = p.record;
            r.assets = (part.asset_ids() != assets.as_slice()).then(|| part.asset_ids().to_vec());
            r
        })
        .collect();

    let seed = input.seed.or(match &cfg.perturbation {
        PerturbationConfig::PopulationResample { seed, .. } | PerturbationConfig::Imputation { seed, .. } => {
            Some(*seed)
        }
        _ => None,
    });
    let preprocessing = (cfg.distance.method != DistanceMethod::TermStructure)
        .then(|| Preprocessing { kind: cfg.kind(), scale: cfg.preprocessing.scale });

    let report = StabilityReport {
        experiment: cfg.experiment.clone(),
        perturbation: cfg.perturbation.name().to_string(),
        distance: DistanceSpec { method: cfg.distance.method, params: cfg.distance.params },
        preprocessing,
        clustering: ClusteringSpec { linkage: cfg.clustering.linkage.clone(), k: cfg.clustering.k },
        assets,
        parts: records,
        partitions: labels.iter().cloned().zip(partitions.iter().map(|p| p.labels().to_vec())).collect(),
        ari: AriMatrix { labels, matrix },
        ground_truth_ari,
        provenance: Provenance {
            input_hash: input.hash,
            seed,
            config: serde_json::to_value(cfg)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    let (distances, dendrograms): (Vec<_>, Vec<_>) = results.into_iter().map(|(d, t, _)| (d, t)).unzip();
    Ok(ExperimentOutput { report, distances, dendrograms, partitions })
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Write `report.json`, one Sankey SVG per adjacent pair of parts, and per
/// part its distance matrix (CSV), partition and dendrogram (JSON).
pub fn write_outputs(out: &ExperimentOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    for sub in ["distances", "partitions", "dendrograms"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    write(dir.join("report.json"), &out.report.to_json()?)?;
    for (name, svg) in out.report.sankey_svgs(&SvgStyle::default())? {
        write(dir.join(name), &svg)?;
    }
    for (i, part) in out.report.parts.iter().enumerate() {
        let stem = format!("{i:02}_{}", file_safe(&part.label));
        write(dir.join("distances").join(format!("{stem}.csv")), &out.distances[i].to_csv())?;
        let mut p = serde_json::to_string_pretty(&out.partitions[i])?;
        p.push('\n');
        write(dir.join("partitions").join(format!("{stem}.json")), &p)?;
        let mut d = serde_json::to_string(&out.dendrograms[i])?;
        d.push('\n');
        write(dir.join("dendrograms").join(format!("{stem}.json")), &d)?;
    }
    Ok(())
}

/// Variations of a panel under the distance's default preprocessing.
pub fn default_variations(panel: &PricePanel, method: DistanceMethod, scale: usize) -> Result<VariationMatrix> {
    let kind: VariationKind = super::config::default_kind(method);
    Ok(variations(panel, kind, scale)?)
}
