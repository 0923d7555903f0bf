//! `clustab` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors and bad configuration, 1 for
//! data and validation failures. Messages name the failing module.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use clustab::clustering::Partition;
use clustab::data::{load_csv, synthesize, variations, LoadedPanel, SyntheticSpec, VariationKind};
use clustab::distances::{self, DistanceMethod, DistanceParams};
use clustab::report::{render_svg, sankey_layout, SvgStyle};
use clustab::stability::{
    ari, common_restriction, default_kind, mean_correlation_series, run_experiment, write_outputs, ExperimentConfig,
    StabilityReport,
};

#[derive(Debug, Parser)]
#[command(name = "clustab", version, about = "Clustering stability analysis for financial time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a price panel from a JSON spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        /// Replaces any `seed` given in the --spec file.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the ground-truth partition here.
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Distance matrix of a price panel.
    Distances {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        method: DistanceMethod,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        /// Defaults to log_diff for pearson/euclidean, diff for spearman/gnpr.
        #[arg(long)]
        kind: Option<VariationKind>,
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full experiment and write its artefacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// ARI between two partition files.
    Compare {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Also draw the pair as a Sankey diagram.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Mean pairwise correlation over sliding windows.
    Meancorr {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        step: usize,
        #[arg(long, default_value = "log_diff")]
        kind: VariationKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Redraw the Sankey diagrams of an existing report.json.
    Render {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Marks errors that should exit with the usage code.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&describe(&self.0))
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    Usage(e.into()).into()
}

/// Route library errors through `clustab::Error` so messages carry the
/// module name.
trait Lib<T> {
    fn lib(self) -> Result<T, clustab::Error>;
}

impl<T, E: Into<clustab::Error>> Lib<T> for Result<T, E> {
    fn lib(self) -> Result<T, clustab::Error> {
        self.map_err(Into::into)
    }
}

/// The error chain on one line. Library errors already embed their sources,
/// so causes whose text is already present are skipped.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg.push_str(": ");
            msg.push_str(&c);
        }
    }
    msg
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Gen { spec, seed, out, labels_out } => gen(&spec, seed, &out, labels_out.as_deref()),
        Command::Distances { input, method, theta, bins, kind, scale, out } => {
            distance_matrix(&input, method, DistanceParams { theta, bins }, kind, scale, &out)
        }
        Command::Run { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config).map_err(usage)?;
            let output = run_experiment(&cfg)?;
            write_outputs(&output, &out_dir)?;
            eprintln!("wrote {} parts to {}", output.report.parts.len(), out_dir.display());
            Ok(())
        }
        Command::Compare { left, right, svg } => compare(&left, &right, svg.as_deref()),
        Command::Meancorr { input, window, step, kind, out } => meancorr(&input, window, step, kind, &out),
        Command::Render { report, out_dir } => {
            let text = read(&report)?;
            let report = StabilityReport::from_json(&text).map_err(usage)?;
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for (name, svg) in report.sankey_svgs(&SvgStyle::default())? {
                write(&out_dir.join(name), &svg)?;
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn gen(spec_path: &Path, seed: u64, out: &Path, labels_out: Option<&Path>) -> anyhow::Result<()> {
    let text = read(spec_path).map_err(usage)?;
    let mut spec: SyntheticSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing spec {}", spec_path.display())).map_err(usage)?;
    spec.seed = seed;
    spec.validate().lib().map_err(usage)?;
    let synth = synthesize(&spec).lib()?;
    write(out, &synth.panel.to_csv())?;
    if let Some(path) = labels_out {
        let truth = Partition::canonical(synth.panel.asset_ids().to_vec(), &synth.labels).lib()?;
        let mut json = serde_json::to_string_pretty(&truth)?;
        json.push('\n');
        write(path, &json)?;
    }
    Ok(())
}

fn load_panel(path: &Path) -> anyhow::Result<LoadedPanel> {
    let loaded = load_csv(path)?;
    if !loaded.excluded.is_empty() {
        eprintln!("data: excluded incomplete assets: {}", loaded.excluded.join(", "));
    }
    Ok(loaded)
}

fn distance_matrix(
    input: &Path,
    method: DistanceMethod,
    params: DistanceParams,
    kind: Option<VariationKind>,
    scale: usize,
    out: &Path,
) -> anyhow::Result<()> {
    if method == DistanceMethod::TermStructure {
        bail!(Usage(anyhow::anyhow!("term_structure needs maturity files; use `run` with a maturities input")));
    }
    if method != DistanceMethod::Gnpr && (params.theta.is_some() || params.bins.is_some()) {
        bail!(Usage(anyhow::anyhow!("--theta and --bins only apply to gnpr")));
    }
    let panel = load_panel(input)?.panel;
    let v = variations(&panel, kind.unwrap_or_else(|| default_kind(method)), scale).lib()?;
    let d = distances::compute(&v, method, params).lib()?;
    write(out, &d.to_csv())
}

fn load_partition(path: &Path) -> anyhow::Result<Partition> {
    let text = read(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing partition {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn compare(left: &Path, right: &Path, svg: Option<&Path>) -> anyhow::Result<()> {
    let (p, q) = (load_partition(left)?, load_partition(right)?);
    let total = p.len().max(q.len());
    let (p, q) = common_restriction(&p, &q).lib()?;
    if p.len() < total {
        eprintln!("stability: comparing on the {} shared assets", p.len());
    }
    let score = ari(&p, &q).lib()?;
    println!("{score:.6}");
    if let Some(path) = svg {
        let diagram = sankey_layout(&[(stem(left), p), (stem(right), q)]).lib()?;
        write(path, &render_svg(&diagram, &SvgStyle::default()).lib()?)?;
    }
    Ok(())
}

fn meancorr(input: &Path, window: usize, step: usize, kind: VariationKind, out: &Path) -> anyhow::Result<()> {
    let panel = load_panel(input)?.panel;
    let v = variations(&panel, kind, 1).lib()?;
    let series = mean_correlation_series(&v, window, step).lib()?;
    let mut csv = String::from("start,end,end_date,mean_correlation,pairs\n");
    for p in &series {
        let date = p.end_date.map(|d| d.to_string()).unwrap_or_default();
        writeln!(csv, "{},{},{},{},{}", p.start, p.end, date, p.mean, p.pairs)?;
    }
    write(out, &csv)
}
