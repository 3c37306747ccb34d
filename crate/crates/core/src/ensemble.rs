//! Monte Carlo harness.
//!
//! Each run derives its own seed from `(master_seed, run_index)`, draws the
//! placement of the equipped vehicles and its noise from that seed alone, and
//! reduces its record to one metric curve. Curves are then folded in run-index
//! order, so the result does not depend on how many worker threads ran them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, TimeWindow};
use crate::model::{ModelParams, VehicleKind};
use crate::scenario::{self, FleetConfig, Geometry, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Speed deviation of each platoon position over a time window.
    PerVehicle,
    /// Speed deviation across the fleet at every instant.
    OverTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub geometry: Geometry,
    pub params: ModelParams,
    pub n_vehicles: usize,
    /// Defaults to [`Geometry::natural_spacing`].
    pub initial_spacing: Option<f64>,
    pub kind: VehicleKind,
    /// Market penetration rate of `kind`, in `[0, 1]`.
    pub mpr: f64,
    /// Zero-based platoon indices of the equipped vehicles. Overrides `mpr`.
    pub fixed_positions: Option<Vec<usize>>,
    pub n_runs: usize,
    pub n_steps: usize,
    pub master_seed: u64,
    pub metric: Metric,
    /// Metric-1 window; defaults to [`TimeWindow::after_warm_up`].
    pub window: Option<TimeWindow>,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_runs == 0 {
            return Err(Error::invalid("n_runs", "must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mpr) {
            return Err(Error::invalid("mpr", format!("must lie in [0, 1], got {}", self.mpr)));
        }
        Ok(())
    }

    pub fn initial_spacing(&self) -> f64 {
        self.initial_spacing
            .unwrap_or_else(|| self.geometry.natural_spacing(self.n_vehicles, &self.params))
    }

    /// Number of equipped vehicles in every run.
    pub fn n_equipped(&self) -> usize {
        match &self.fixed_positions {
            Some(p) => p.len(),
            None => scenario::equipped_count(self.n_vehicles, self.mpr),
        }
    }

    /// The all-HV counterpart sharing geometry, seeds and horizon.
    pub fn baseline(&self) -> Self {
        Self {
            kind: VehicleKind::Hv,
            mpr: 0.0,
            fixed_positions: None,
            ..self.clone()
        }
    }

    pub fn is_baseline(&self) -> bool {
        self.kind == VehicleKind::Hv || self.n_equipped() == 0
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        run_seed(self.master_seed, run as u64)
    }

    /// Vehicle classes used by run `run`.
    pub fn fleet_for_run(&self, run: usize) -> Result<FleetConfig> {
        let kinds = match &self.fixed_positions {
            Some(positions) => scenario::place_at(self.n_vehicles, positions, self.kind)?,
            None => {
                let mut rng = scenario::placement_rng(self.run_seed(run));
                scenario::place_intelligent(self.n_vehicles, self.mpr, self.kind, &mut rng)?
            }
        };
        Ok(FleetConfig::new(kinds, self.initial_spacing()))
    }

    /// Metric curve of a single run.
    pub fn run_curve(&self, run: usize) -> Result<Vec<f64>> {
        let seed = self.run_seed(run);
        let wrap = |e| Error::RunFailed {
            run,
            seed,
            source: Box::new(e),
        };
        let fleet = self.fleet_for_run(run).map_err(wrap)?;
        let record = Scenario::new(self.geometry, fleet, self.params)
            .and_then(|s| s.run(seed, self.n_steps))
            .map_err(wrap)?;
        let values = match self.metric {
            Metric::PerVehicle => {
                let window = self.window.unwrap_or_else(|| TimeWindow::after_warm_up(&record));
                metrics::per_vehicle_std(&record, window).map_err(wrap)?.values
            }
            Metric::OverTime => metrics::over_time_std(&record).map_err(wrap)?.values,
        };
        Ok(values)
    }

    /// Window metric 1 is measured over, in seconds.
    pub fn effective_window(&self) -> Option<TimeWindow> {
        match self.metric {
            Metric::PerVehicle => Some(self.window.unwrap_or_else(|| {
                let dt = self.params.time_gap;
                TimeWindow::new(self.n_vehicles as f64 * dt, self.n_steps as f64 * dt)
            })),
            Metric::OverTime => None,
        }
    }
}

/// Stable per-run seed: SplitMix64 over `master + (run + 1) * golden`.
///
/// The finalizer is a bijection on `u64` and the golden-ratio increment is
/// odd, so distinct run indices below `2^64` never share a seed.
pub fn run_seed(master_seed: u64, run: u64) -> u64 {
    let mut z = master_seed.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pointwise mean and standard error over Monte Carlo runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCurve {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_runs: usize,
    pub spec: Option<EnsembleSpec>,
}

impl EnsembleCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.mean.last()?, *self.stderr.last()?))
    }

    /// Mean and (averaged pointwise) standard error over the final `duration` seconds.
    pub fn tail(&self, dt: f64, duration: f64) -> (f64, f64) {
        (
            metrics::tail_mean(&self.mean, dt, duration),
            metrics::tail_mean(&self.stderr, dt, duration),
        )
    }
}

/// Fold run curves in order into a mean and standard error.
pub fn aggregate(curves: &[Vec<f64>]) -> Result<EnsembleCurve> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Metric("cannot aggregate zero runs".into()))?;
    let len = first.len();
    if curves.iter().any(|c| c.len() != len) {
        return Err(Error::Metric("run curves differ in length".into()));
    }
    let mut mean = vec![0.0; len];
    let mut m2 = vec![0.0; len];
    for (k, curve) in curves.iter().enumerate() {
        let count = (k + 1) as f64;
        for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(curve) {
            let delta = x - *m;
            *m += delta / count;
            *s += delta * (x - *m);
        }
    }
    let n = curves.len();
    let stderr = m2
        .iter()
        .map(|&s| {
            if n < 2 {
                0.0
            } else {
                (s.max(0.0) / (n - 1) as f64 / n as f64).sqrt()
            }
        })
        .collect();
    Ok(EnsembleCurve {
        mean,
        stderr,
        n_runs: n,
        spec: None,
    })
}

/// Metric curve of every run, in run-index order.
pub fn run_curves(spec: &EnsembleSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    // results are collected in index order, so the first error is reproducible
    (0..spec.n_runs)
        .into_par_iter()
        .map(|run| spec.run_curve(run))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleCurve> {
    let curves = run_curves(spec)?;
    let mut curve = aggregate(&curves)?;
    curve.spec = Some(spec.clone());
    Ok(curve)
}

/// Statistic summarizing each ensemble curve in a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Summary {
    /// Last point: the last platoon vehicle, or the end of the horizon.
    FinalPoint,
    /// Mean over the final given seconds of an over-time curve.
    Tail { seconds: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: VehicleKind,
    pub mpr: f64,
    pub n_equipped: usize,
    pub mean: f64,
    pub stderr: f64,
    pub reduction_pct: f64,
    /// Standard error of the reduction treating both ensembles as independent.
    pub reduction_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    /// Baseline first, then the treated specs in input order.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, kind: VehicleKind, mpr: f64) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.kind == kind && (r.mpr - mpr).abs() < 1e-12)
    }
}

/// Final-point comparison of each spec against the all-HV baseline.
pub fn compare_kinds(specs: &[EnsembleSpec]) -> Result<ComparisonTable> {
    compare_kinds_by(specs, Summary::FinalPoint)
}

/// Run every spec (and the baseline, when no spec is one) and tabulate the
/// summary statistic with its reduction against the baseline.
pub fn compare_kinds_by(specs: &[EnsembleSpec], summary: Summary) -> Result<ComparisonTable> {
    let first = specs
        .first()
        .ok_or_else(|| Error::invalid("specs", "nothing to compare"))?;
    for spec in specs {
        spec.validate()?;
        let same = spec.geometry == first.geometry
            && spec.params == first.params
            && spec.n_vehicles == first.n_vehicles
            && spec.initial_spacing() == first.initial_spacing()
            && spec.n_steps == first.n_steps
            && spec.n_runs == first.n_runs
            && spec.master_seed == first.master_seed
            && spec.metric == first.metric
            && spec.effective_window() == first.effective_window();
        if !same {
            return Err(Error::invalid(
                "specs",
                "compared ensembles must share geometry, parameters, fleet size, horizon, runs, seed, metric and window",
            ));
        }
    }

    let summarize = |spec: &EnsembleSpec| -> Result<(f64, f64)> {
        let curve = run_ensemble(spec)?;
        Ok(match summary {
            Summary::FinalPoint => curve.last().expect("curves are non-empty"),
            Summary::Tail { seconds } => curve.tail(spec.params.time_gap, seconds),
        })
    };

    let baseline_spec = specs
        .iter()
        .find(|s| s.is_baseline())
        .cloned()
        .unwrap_or_else(|| first.baseline());
    let (base_mean, base_err) = summarize(&baseline_spec)?;

    let row = |spec: &EnsembleSpec, mean: f64, stderr: f64| -> Result<ComparisonRow> {
        let reduction = metrics::reduction_pct(base_mean, mean)?;
        let ratio_var = (stderr / base_mean).powi(2) + (mean * base_err / base_mean.powi(2)).powi(2);
        Ok(ComparisonRow {
            kind: spec.kind,
            mpr: if spec.fixed_positions.is_some() {
                spec.n_equipped() as f64 / spec.n_vehicles as f64
            } else {
                spec.mpr
            },
            n_equipped: spec.n_equipped(),
            mean,
            stderr,
            reduction_pct: reduction,
            reduction_stderr: 100.0 * ratio_var.sqrt(),
        })
    };

    let mut rows = vec![ComparisonRow {
        reduction_stderr: 0.0,
        ..row(&baseline_spec, base_mean, base_err)?
    }];
    for spec in specs.iter().filter(|s| **s != baseline_spec) {
        let (mean, stderr) = summarize(spec)?;
        rows.push(row(spec, mean, stderr)?);
    }
    Ok(ComparisonTable { rows })
}
