//! Command-line front end. Every command resolves an [`ExperimentConfig`]
//! and calls the same library functions a program would.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::ensemble::{self, Metric};
use crate::error::{Error, Result};
use crate::io::{self, CsvKind};
use crate::model::VehicleKind;
use crate::svg;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "STOPGO_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  other failure (invalid parameter, infeasible scenario, ...)
  2  usage error
  3  unknown preset
  4  malformed config file
  5  collision during a simulation
  6  I/O or CSV error

Presets: fig1 fig2 fig3b fig4 fig5 fig6-mpr1 fig6-mpr2 fig6-mpr5 fig6-mpr10 default
Output goes to --out, else $STOPGO_OUT_DIR, else ./out";

#[derive(Debug, Parser)]
#[command(name = "stopgo", version, about = "Stochastic car-following simulator for stop-and-go waves", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate once; write trajectory and speed CSVs plus a trajectory SVG.
    Run(ExperimentArgs),
    /// Monte Carlo ensemble of one kind at one rate; write the mean curve.
    Mcs(ExperimentArgs),
    /// Compare every configured kind and rate against the all-HV baseline.
    Compare(ExperimentArgs),
    /// Render SVG plots from CSV files written by the other commands.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Default)]
pub struct ExperimentArgs {
    /// TOML config file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Compiled-in preset
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Intelligent vehicle kind (HV, AV, MAV, PCV, PCAV, FCV, FCAV)
    #[arg(long)]
    pub kind: Option<VehicleKind>,
    /// Market penetration rate in [0, 1]
    #[arg(long)]
    pub mpr: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV files (trajectory, speeds, ensemble or comparison)
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Top of the speed colour scale, m/s
    #[arg(long, default_value_t = 25.0)]
    pub max_speed: f64,
    /// Ring length, to wrap trajectory positions
    #[arg(long)]
    pub ring_length: Option<f64>,
}

/// Process exit code for an error; see `--help`.
pub fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::UnknownPreset(_) => 3,
        Error::Config(_) => 4,
        Error::Collision { .. } => 5,
        Error::Io(_) | Error::Csv(_) | Error::MalformedCsv { .. } => 6,
        _ => 1,
    }
}

impl ExperimentArgs {
    /// Flags over config file over preset.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                ExperimentConfig::from_toml(&text, self.preset.as_deref())?
            }
            None => ExperimentConfig::preset(self.preset.as_deref().unwrap_or("default"))?,
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(kind) = self.kind {
            cfg.kinds = vec![kind];
        }
        if let Some(mpr) = self.mpr {
            cfg.mprs = vec![mpr];
            cfg.fixed_positions = None;
        }
        if let Some(runs) = self.runs {
            cfg.runs = runs;
        }
        if let Some(steps) = self.steps {
            cfg.steps = steps;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Execute a parsed command; returns the files written.
pub fn execute(command: &Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Mcs(args) => cmd_mcs(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn cmd_run(args: &ExperimentArgs) -> Result<Vec<PathBuf>> {
    let cfg = args.resolve()?;
    let dir = out_dir(args.out.as_deref());
    let record = cfg.run_single()?;
    let base = format!("{}-run", cfg.name);
    let traj = dir.join(format!("{base}-trajectory.csv"));
    let speeds = dir.join(format!("{base}-speeds.csv"));
    let plot = dir.join(format!("{base}-trajectory.svg"));
    io::write_file(&traj, |w| io::write_trajectory(&record, w))?;
    io::write_file(&speeds, |w| io::write_speeds(&record, w))?;
    let title = format!("{} seed {}", cfg.name, cfg.seed);
    let rows = io::trajectory_rows(&record);
    let doc = svg::trajectory_svg(&rows, cfg.params.free_flow_speed, record.ring_length, &title);
    std::fs::write(&plot, doc)?;
    Ok(vec![traj, speeds, plot])
}

fn cmd_mcs(args: &ExperimentArgs) -> Result<Vec<PathBuf>> {
    let cfg = args.resolve()?;
    let dir = out_dir(args.out.as_deref());
    let spec = cfg.primary_spec();
    let curve = ensemble::run_ensemble(&spec)?;
    let base = format!("{}-mcs-{}", cfg.name, spec.kind);
    let csv = dir.join(format!("{base}.csv"));
    let meta = dir.join(format!("{base}.toml"));
    io::write_file(&csv, |w| io::write_ensemble(&curve, first_index(spec.metric), w))?;
    // the resolved experiment, including the effective metric window
    let mut echo = cfg.clone();
    echo.kinds = vec![spec.kind];
    echo.mprs = vec![spec.mpr];
    echo.window = spec.effective_window();
    std::fs::write(&meta, echo.to_toml())?;
    if let Some(seconds) = cfg.tail_seconds.filter(|_| spec.metric == Metric::OverTime) {
        let (mean, err) = curve.tail(cfg.params.time_gap, seconds);
        eprintln!("tail mean over last {seconds} s: {mean:.4} +/- {err:.4}");
    }
    Ok(vec![csv, meta])
}

fn cmd_compare(args: &ExperimentArgs) -> Result<Vec<PathBuf>> {
    let cfg = args.resolve()?;
    let dir = out_dir(args.out.as_deref());
    let table = ensemble::compare_kinds_by(&cfg.comparison_specs(), cfg.summary())?;
    let csv = dir.join(format!("{}-compare.csv", cfg.name));
    io::write_file(&csv, |w| io::write_comparison(&table, w))?;
    Ok(vec![csv])
}

fn cmd_plot(args: &PlotArgs) -> Result<Vec<PathBuf>> {
    let dir = out_dir(args.out.as_deref());
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    for input in &args.inputs {
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
        let title = stem.to_string();
        let doc = match io::detect(input)? {
            CsvKind::Trajectory => {
                let rows = io::read_trajectory(input)?;
                svg::trajectory_svg(&rows, args.max_speed, args.ring_length, &title)
            }
            CsvKind::Speeds => {
                let (header, rows) = io::read_speeds(input)?;
                let series = header[1..]
                    .iter()
                    .enumerate()
                    .map(|(c, label)| svg::Series {
                        label: label.clone(),
                        points: rows.iter().map(|r| (r[0], r[c + 1])).collect(),
                    })
                    .collect::<Vec<_>>();
                svg::curves_svg(&series, &title, "time (s)", "speed (m/s)")
            }
            CsvKind::Ensemble => {
                let (index, curve) = io::read_ensemble(input)?;
                let series = svg::Series {
                    label: "mean std".into(),
                    points: index.iter().map(|&i| i as f64).zip(curve.mean).collect(),
                };
                svg::curves_svg(&[series], &title, "index", "speed std (m/s)")
            }
            CsvKind::Comparison => svg::comparison_svg(&io::read_comparison(input)?, &title),
        };
        let path = dir.join(format!("{stem}.svg"));
        std::fs::write(&path, doc)?;
        written.push(path);
    }
    Ok(written)
}

/// Platoon positions are numbered from 1, time samples from 0.
pub fn first_index(metric: Metric) -> usize {
    match metric {
        Metric::PerVehicle => 1,
        Metric::OverTime => 0,
    }
}
