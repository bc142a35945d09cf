//! Command-line front end for the `gmwp` solvers.
//!
//! Subcommands:
//!
//! * `gen`   write a synthetic Gaussian mixture as CSV,
//! * `run`   one solve, report as JSON,
//! * `bench` multi-start runs, per-run CSV plus a JSON summary,
//! * `plot`  SVG scatter of a report's clustering.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gmwp_core::{
    generate_synthetic, load_csv, GaugeKind, LabelColumn, LabeledDataset, MeanLayout, MergeParams, SolveParams,
    SolveReport, SyntheticSpec,
};

pub mod bench;
pub mod plot;

pub use bench::{run_bench, write_results_csv, BenchOutput, BenchSummary, RESULTS_HEADER};
pub use plot::render_svg;

/// Exit status for unreadable or malformed input data.
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gmwp", version, about = "Smoothed multi-source Weber clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset as CSV (label column last).
    Gen(GenArgs),
    /// Run one solve and print its report as JSON.
    Run(RunArgs),
    /// Run many seeded solves and write a results table and summary.
    Bench(BenchArgs),
    /// Draw a report's clustering as an SVG scatter plot.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GaugeArg {
    L1,
    L2,
    Linf,
}

impl From<GaugeArg> for GaugeKind {
    fn from(g: GaugeArg) -> Self {
        match g {
            GaugeArg::L1 => GaugeKind::L1,
            GaugeArg::L2 => GaugeKind::L2,
            GaugeArg::Linf => GaugeKind::LInf,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    /// Number of true clusters.
    #[arg(long, default_value_t = 6)]
    pub clusters: usize,
    #[arg(long, default_value_t = 50)]
    pub points_per_cluster: usize,
    #[arg(long, default_value_t = 0.3)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Cluster means sit on a circle of this radius.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 2026)]
    pub data_seed: u64,
}

impl SyntheticArgs {
    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            k_true: self.clusters,
            points_per_cluster: self.points_per_cluster,
            noise_std: self.noise_std,
            dim: self.dim,
            mean_layout: MeanLayout::Circle { radius: self.radius },
            seed: self.data_seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Load points from this CSV instead of generating synthetic data.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Label column of the CSV, by 0-based index or header name.
    #[arg(long)]
    pub label_col: Option<LabelColumn>,
    /// Standardize every feature to zero mean and unit variance.
    #[arg(long)]
    pub zscore: bool,
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
}

impl DataArgs {
    pub fn load(&self) -> anyhow::Result<LabeledDataset> {
        let mut data = match &self.csv {
            Some(path) => load_csv(path, self.label_col.as_ref())?,
            None => {
                if self.label_col.is_some() {
                    bail!("--label-col requires --csv");
                }
                generate_synthetic(&self.synthetic.spec())?
            }
        };
        if self.zscore {
            data.zscore();
        }
        Ok(data)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = GaugeArg::L2)]
    pub gauge: GaugeArg,
    #[arg(long, value_enum, default_value_t = Mode::Adaptive)]
    pub mode: Mode,
    /// Number of initial centers, drawn from the data points.
    #[arg(long, default_value_t = 10)]
    pub k_init: usize,
    /// Base seed; run `r` of a bench uses `seed + r`.
    #[arg(long, default_value_t = 2026)]
    pub seed: u64,
    /// Decreasing smoothing levels.
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.2,0.1,0.01")]
    pub mu_schedule: Vec<f64>,
    /// Stepsize is step_factor * mu / m.
    #[arg(long, default_value_t = 1.8)]
    pub step_factor: f64,
    /// Relative gradient tolerance of each stage.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Iteration budget shared by all stages.
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Merge period in iterations (adaptive mode).
    #[arg(long, default_value_t = 1)]
    pub t_merge: usize,
    /// Quantile of pairwise center distances used as merge threshold.
    #[arg(long, default_value_t = 0.10)]
    pub q: f64,
    /// Penalty per center in the merge test.
    #[arg(long, default_value_t = 10.0)]
    pub lambda_k: f64,
}

impl SolverArgs {
    pub fn solve_params(&self, seed: u64) -> SolveParams {
        SolveParams {
            mu_schedule: self.mu_schedule.clone(),
            step_factor: self.step_factor,
            epsilon: self.epsilon,
            max_total_iters: self.max_iters,
            seed,
            record_path: false,
        }
    }

    pub fn merge_params(&self) -> MergeParams {
        MergeParams { t_merge: self.t_merge, q: self.q, lambda_k: self.lambda_k }
    }

    pub fn gauge(&self) -> GaugeKind {
        self.gauge.into()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.k_init == 0 {
            bail!("--k-init must be at least 1");
        }
        self.solve_params(self.seed).validate()?;
        if self.mode == Mode::Adaptive {
            self.merge_params().validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Record the smoothed objective after every iteration.
    #[arg(long)]
    pub record_path: bool,
    /// Report zero wall time, making the output reproducible byte for byte.
    #[arg(long)]
    pub no_time: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    /// Report zero wall time, making the output reproducible byte for byte.
    #[arg(long)]
    pub no_time: bool,
    /// Output directory for `results.csv`, `summary.json` and `best.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// JSON report written by `run` (or `best.json` from `bench`).
    #[arg(long, value_parser = non_empty_path)]
    pub report: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Plot the first two coordinates of higher-dimensional data.
    #[arg(long)]
    pub first_two: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn non_empty_path(s: &str) -> Result<PathBuf, String> {
    if s.trim().is_empty() {
        Err("path must not be empty".into())
    } else {
        Ok(PathBuf::from(s))
    }
}

/// Exit status for a failed command: data loading problems map to
/// [`EXIT_DATA`], everything else to 1.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<gmwp_core::Error>() {
        Some(gmwp_core::Error::Load { .. } | gmwp_core::Error::Io { .. }) => EXIT_DATA,
        _ => 1,
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

pub fn cmd_gen(args: &GenArgs) -> anyhow::Result<()> {
    let data = generate_synthetic(&args.synthetic.spec())?;
    data.write_csv(&args.out)?;
    Ok(())
}

/// One solve; the seed picks both the initial centers and the report seed.
pub fn solve_once(data: &LabeledDataset, solver: &SolverArgs, seed: u64, record_path: bool) -> anyhow::Result<SolveReport> {
    let params = SolveParams { record_path, ..solver.solve_params(seed) };
    let init = gmwp_core::init_centers(&data.dataset, solver.k_init, seed)?;
    let report = match solver.mode {
        Mode::Fixed => gmwp_core::solve_fixed(solver.gauge(), &data.dataset, &params, &init)?,
        Mode::Adaptive => {
            gmwp_core::solve_adaptive(solver.gauge(), &data.dataset, &params, &solver.merge_params(), &init)?
        }
    };
    Ok(report)
}

/// Wall time rounded to whole milliseconds.
pub fn round_ms(seconds: f64) -> f64 {
    (seconds * 1000.0).round() / 1000.0
}

pub fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    args.solver.validate()?;
    let data = args.data.load()?;
    let mut report = solve_once(&data, &args.solver, args.solver.seed, args.record_path)?;
    report.wall_time_s = if args.no_time { 0.0 } else { round_ms(report.wall_time_s) };
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => write_file(path, format!("{json}\n").as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{json}").and_then(|()| out.flush()) {
                // A closed downstream pipe (`gmwp run | head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    args.solver.validate()?;
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let data = args.data.load()?;
    let out = run_bench(&data, &args.solver, args.runs, args.no_time)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut csv = Vec::new();
    write_results_csv(&mut csv, &out.summary.runs)?;
    write_file(&args.out.join("results.csv"), &csv)?;
    let summary = serde_json::to_string_pretty(&out.summary)?;
    write_file(&args.out.join("summary.json"), format!("{summary}\n").as_bytes())?;
    let best = serde_json::to_string_pretty(&out.best_report)?;
    write_file(&args.out.join("best.json"), format!("{best}\n").as_bytes())?;

    let best = &out.summary.aggregate.best;
    eprintln!(
        "best of {}: run {} seed {} ACC {} Obj {:.4} k {}",
        args.runs,
        best.run_id,
        best.seed,
        best.acc.map_or("-".into(), |a| format!("{a:.4}")),
        best.objective_raw,
        best.k_final
    );
    Ok(())
}

pub fn cmd_plot(args: &PlotArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.report).with_context(|| format!("reading {}", args.report.display()))?;
    let report: SolveReport =
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", args.report.display()))?;
    let data = args.data.load()?;
    let svg = render_svg(&data.dataset, &report, args.first_two)?;
    write_file(&args.out, svg.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
