//! Experiment configuration: compiled-in presets for the reference
//! experiments and a TOML file format layered on top of them.
//!
//! ```toml
//! preset = "fig4"            # optional starting point
//!
//! [model]
//! free_flow_speed = 25.0
//! jam_spacing = 7.5
//! time_gap = 1.5
//! noise_amplitude = 0.25
//! noise_model = "spacing_perception"   # or "speed_per_update"
//!
//! [scenario]
//! geometry = "open_road"     # or "ring"
//! leader_speed = 9.6666667   # open road
//! ring_length = 6000.0       # ring
//! n_vehicles = 200
//! initial_spacing = 22.0
//!
//! [ensemble]
//! kinds = ["PCAV", "MAV"]
//! mprs = [0.01, 0.02]
//! fixed_positions = [49]     # zero-based; overrides mprs
//! runs = 250
//! steps = 1200
//! seed = 1
//! metric = "per_vehicle"     # or "over_time"
//! window = [300.0, 1800.0]   # seconds, metric 1 only
//! tail_seconds = 300.0       # compare: summarize by tail mean
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleSpec, Metric, Summary};
use crate::error::{Error, Result};
use crate::metrics::TimeWindow;
use crate::model::{ModelParams, NoiseModel, VehicleKind};
use crate::scenario::{self, FleetConfig, Geometry, RunRecord, Scenario};

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub params: ModelParams,
    pub geometry: Geometry,
    pub n_vehicles: usize,
    pub initial_spacing: Option<f64>,
    /// Intelligent kinds studied; `mcs` and `run` use the first.
    pub kinds: Vec<VehicleKind>,
    /// Penetration rates studied; `mcs` and `run` use the first.
    pub mprs: Vec<f64>,
    pub fixed_positions: Option<Vec<usize>>,
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    pub metric: Metric,
    pub window: Option<TimeWindow>,
    pub tail_seconds: Option<f64>,
}

pub const PRESET_NAMES: [&str; 10] = [
    "fig1",
    "fig2",
    "fig3b",
    "fig4",
    "fig5",
    "fig6-mpr1",
    "fig6-mpr2",
    "fig6-mpr5",
    "fig6-mpr10",
    "default",
];

impl ExperimentConfig {
    fn open_road(name: &str, n_vehicles: usize) -> Self {
        let params = ModelParams::default();
        Self {
            name: name.to_string(),
            params,
            // the leader runs at the equilibrium speed of the 22 m start
            geometry: Geometry::OpenRoad {
                leader_speed: params.equilibrium_speed(22.0),
            },
            n_vehicles,
            initial_spacing: Some(22.0),
            kinds: vec![VehicleKind::Hv],
            mprs: vec![0.0],
            fixed_positions: None,
            runs: 1,
            steps: 600,
            seed: 1,
            metric: Metric::PerVehicle,
            window: None,
            tail_seconds: None,
        }
    }

    fn ring(name: &str, length: f64, n_vehicles: usize) -> Self {
        Self {
            geometry: Geometry::Ring { length },
            initial_spacing: None,
            metric: Metric::OverTime,
            ..Self::open_road(name, n_vehicles)
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        use VehicleKind::*;
        let automated = vec![Av, Pcav, Mav, Fcav];
        let cfg = match name {
            "default" => Self::open_road(name, 100),
            "fig1" => Self {
                seed: 7,
                ..Self::open_road(name, 100)
            },
            "fig2" => Self {
                kinds: vec![Av, Mav, Pcv, Pcav, Fcv, Fcav],
                mprs: vec![0.01],
                fixed_positions: Some(vec![49]),
                runs: 500,
                steps: 1100,
                ..Self::open_road(name, 100)
            },
            "fig3b" => Self {
                kinds: vec![Av, Mav, Pcv, Pcav, Fcv, Fcav],
                mprs: vec![0.01],
                runs: 500,
                steps: 1100,
                ..Self::open_road(name, 100)
            },
            "fig4" => Self {
                kinds: automated,
                mprs: vec![0.01, 0.02],
                runs: 250,
                steps: 1200,
                ..Self::open_road(name, 200)
            },
            "fig5" => Self {
                kinds: vec![Av, Mav, Fcav],
                mprs: vec![0.02],
                steps: 600,
                ..Self::ring(name, 2500.0, 100)
            },
            _ => {
                let mpr = name
                    .strip_prefix("fig6-mpr")
                    .and_then(|p| p.parse::<u32>().ok())
                    .filter(|p| [1, 2, 5, 10].contains(p))
                    .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
                Self {
                    kinds: automated,
                    mprs: vec![mpr as f64 / 100.0],
                    runs: 100,
                    steps: 1200,
                    tail_seconds: Some(300.0),
                    ..Self::ring(name, 6000.0, 200)
                }
            }
        };
        Ok(cfg)
    }

    /// Parse a TOML config on top of a preset. An explicit `preset` argument
    /// wins over the file's own `preset` key; with neither, `default` is used.
    pub fn from_toml(text: &str, preset: Option<&str>) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let base = preset.or(file.preset.as_deref()).unwrap_or("default");
        let mut cfg = Self::preset(base)?;
        file.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>, preset: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text, preset)
    }

    /// Render in the config file format; parsing the result gives `self` back.
    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from(self)).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.kinds.is_empty() {
            return Err(Error::Config("`kinds` must list at least one vehicle kind".into()));
        }
        if self.mprs.is_empty() {
            return Err(Error::Config("`mprs` must list at least one rate".into()));
        }
        Ok(())
    }

    pub fn ensemble_spec(&self, kind: VehicleKind, mpr: f64) -> EnsembleSpec {
        EnsembleSpec {
            geometry: self.geometry,
            params: self.params,
            n_vehicles: self.n_vehicles,
            initial_spacing: self.initial_spacing,
            kind,
            mpr,
            fixed_positions: self.fixed_positions.clone(),
            n_runs: self.runs,
            n_steps: self.steps,
            master_seed: self.seed,
            metric: self.metric,
            window: self.window,
        }
    }

    /// Spec for the first kind and rate.
    pub fn primary_spec(&self) -> EnsembleSpec {
        self.ensemble_spec(self.kinds[0], self.mprs[0])
    }

    /// All-HV baseline followed by every kind at every rate.
    pub fn comparison_specs(&self) -> Vec<EnsembleSpec> {
        let mut specs = vec![self.primary_spec().baseline()];
        for &mpr in &self.mprs {
            for &kind in &self.kinds {
                let spec = self.ensemble_spec(kind, mpr);
                if !spec.is_baseline() {
                    specs.push(spec);
                }
            }
        }
        specs
    }

    /// Fleet of the single-run view: fixed positions if any, otherwise the
    /// first rate placed with the placement stream of `seed`.
    pub fn single_fleet(&self) -> Result<FleetConfig> {
        let kind = self.kinds[0];
        let kinds = match &self.fixed_positions {
            Some(positions) => scenario::place_at(self.n_vehicles, positions, kind)?,
            None => {
                let mut rng = scenario::placement_rng(self.seed);
                scenario::place_intelligent(self.n_vehicles, self.mprs[0], kind, &mut rng)?
            }
        };
        let spacing = self
            .initial_spacing
            .unwrap_or_else(|| self.geometry.natural_spacing(self.n_vehicles, &self.params));
        Ok(FleetConfig::new(kinds, spacing))
    }

    /// One simulation with `seed`, the view behind the `run` command.
    pub fn run_single(&self) -> Result<RunRecord> {
        self.validate()?;
        Scenario::new(self.geometry, self.single_fleet()?, self.params)?.run(self.seed, self.steps)
    }

    pub fn summary(&self) -> Summary {
        match self.tail_seconds {
            Some(seconds) => Summary::Tail { seconds },
            None => Summary::FinalPoint,
        }
    }
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<String>,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    ensemble: EnsembleSection,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    free_flow_speed: Option<f64>,
    jam_spacing: Option<f64>,
    time_gap: Option<f64>,
    noise_amplitude: Option<f64>,
    noise_model: Option<NoiseModel>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    geometry: Option<String>,
    leader_speed: Option<f64>,
    ring_length: Option<f64>,
    n_vehicles: Option<usize>,
    initial_spacing: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EnsembleSection {
    kinds: Option<Vec<VehicleKind>>,
    mprs: Option<Vec<f64>>,
    fixed_positions: Option<Vec<usize>>,
    runs: Option<usize>,
    steps: Option<usize>,
    seed: Option<u64>,
    metric: Option<Metric>,
    window: Option<[f64; 2]>,
    tail_seconds: Option<f64>,
}

impl From<&ExperimentConfig> for ConfigFile {
    fn from(cfg: &ExperimentConfig) -> Self {
        let p = &cfg.params;
        let (geometry, leader_speed, ring_length) = match cfg.geometry {
            Geometry::OpenRoad { leader_speed } => ("open_road", Some(leader_speed), None),
            Geometry::Ring { length } => ("ring", None, Some(length)),
        };
        ConfigFile {
            preset: Some(cfg.name.clone()),
            model: ModelSection {
                free_flow_speed: Some(p.free_flow_speed),
                jam_spacing: Some(p.jam_spacing),
                time_gap: Some(p.time_gap),
                noise_amplitude: Some(p.noise_amplitude),
                noise_model: Some(p.noise_model),
            },
            scenario: ScenarioSection {
                geometry: Some(geometry.to_string()),
                leader_speed,
                ring_length,
                n_vehicles: Some(cfg.n_vehicles),
                initial_spacing: cfg.initial_spacing,
            },
            ensemble: EnsembleSection {
                kinds: Some(cfg.kinds.clone()),
                mprs: Some(cfg.mprs.clone()),
                fixed_positions: cfg.fixed_positions.clone(),
                runs: Some(cfg.runs),
                steps: Some(cfg.steps),
                seed: Some(cfg.seed),
                metric: Some(cfg.metric),
                window: cfg.window.map(|w| [w.start, w.end]),
                tail_seconds: cfg.tail_seconds,
            },
        }
    }
}

impl ConfigFile {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<()> {
        let m = self.model;
        let p = &mut cfg.params;
        if let Some(v) = m.free_flow_speed {
            p.free_flow_speed = v;
        }
        if let Some(v) = m.jam_spacing {
            p.jam_spacing = v;
        }
        if let Some(v) = m.time_gap {
            p.time_gap = v;
        }
        if let Some(v) = m.noise_amplitude {
            p.noise_amplitude = v;
        }
        if let Some(v) = m.noise_model {
            p.noise_model = v;
        }

        let s = self.scenario;
        let geometry = s.geometry.as_deref().unwrap_or(match cfg.geometry {
            Geometry::OpenRoad { .. } => "open_road",
            Geometry::Ring { .. } => "ring",
        });
        cfg.geometry = match geometry {
            "open_road" => {
                if s.ring_length.is_some() {
                    return Err(Error::Config("`ring_length` given for an open road".into()));
                }
                let leader_speed = s.leader_speed.unwrap_or(match cfg.geometry {
                    Geometry::OpenRoad { leader_speed } => leader_speed,
                    Geometry::Ring { .. } => cfg.params.equilibrium_speed(22.0),
                });
                Geometry::OpenRoad { leader_speed }
            }
            "ring" => {
                if s.leader_speed.is_some() {
                    return Err(Error::Config("`leader_speed` given for a ring road".into()));
                }
                let length = match (s.ring_length, cfg.geometry) {
                    (Some(l), _) => l,
                    (None, Geometry::Ring { length }) => length,
                    (None, Geometry::OpenRoad { .. }) => {
                        return Err(Error::Config("ring geometry needs `ring_length`".into()))
                    }
                };
                if s.initial_spacing.is_none() {
                    cfg.initial_spacing = None;
                }
                Geometry::Ring { length }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown geometry `{other}` (expected open_road or ring)"
                )))
            }
        };
        if let Some(n) = s.n_vehicles {
            cfg.n_vehicles = n;
        }
        if let Some(v) = s.initial_spacing {
            cfg.initial_spacing = Some(v);
        }

        let e = self.ensemble;
        if let Some(v) = e.kinds {
            cfg.kinds = v;
        }
        if let Some(v) = e.mprs {
            cfg.mprs = v;
        }
        if let Some(v) = e.fixed_positions {
            cfg.fixed_positions = Some(v);
        }
        if let Some(v) = e.runs {
            cfg.runs = v;
        }
        if let Some(v) = e.steps {
            cfg.steps = v;
        }
        if let Some(v) = e.seed {
            cfg.seed = v;
        }
        if let Some(v) = e.metric {
            cfg.metric = v;
        }
        if let Some([start, end]) = e.window {
            cfg.window = Some(TimeWindow::new(start, end));
        }
        if let Some(v) = e.tail_seconds {
            cfg.tail_seconds = Some(v);
        }
        cfg.validate()
    }
}
