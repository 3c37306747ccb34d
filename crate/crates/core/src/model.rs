//! Stochastic Newell speed-spacing law and the desired-spacing rule of each
//! vehicle class.
//!
//! Every vehicle maps a *desired spacing* to a speed through the triangular
//! fundamental diagram `min(u0, (s - s_j) / tau)` and clamps the result to
//! `[0, u0]`. Noisy vehicles perturb either the perceived spacing (default)
//! or the resulting speed; see [`NoiseModel`].
//! The classes differ only in how the desired spacing is formed and whether
//! the perturbation applies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the perturbation of a noisy vehicle enters the speed law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Perception error on the desired spacing: `V(s_d + sigma * z)`, sigma in m.
    /// On the congested branch this is a speed perturbation of `sigma / tau`.
    #[default]
    SpacingPerception,
    /// Additive per-update speed perturbation: `V(s_d) + sigma * z`, sigma in m/s.
    SpeedPerUpdate,
}

/// Fundamental-diagram and noise constants shared by every vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Free-flow speed `u0`, m/s.
    pub free_flow_speed: f64,
    /// Jam spacing `s_j`, m.
    pub jam_spacing: f64,
    /// Time gap `tau`, s. Also the update interval of the speed law.
    pub time_gap: f64,
    /// Perturbation amplitude `sigma` for noisy vehicles; units follow
    /// [`NoiseModel`].
    pub noise_amplitude: f64,
    #[serde(default)]
    pub noise_model: NoiseModel,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            free_flow_speed: 25.0,
            jam_spacing: 7.5,
            time_gap: 1.5,
            noise_amplitude: 0.25,
            noise_model: NoiseModel::default(),
        }
    }
}

impl ModelParams {
    pub fn new(free_flow_speed: f64, jam_spacing: f64, time_gap: f64, noise_amplitude: f64) -> Result<Self> {
        let params = Self {
            free_flow_speed,
            jam_spacing,
            time_gap,
            noise_amplitude,
            noise_model: NoiseModel::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("free_flow_speed", self.free_flow_speed)?;
        positive("jam_spacing", self.jam_spacing)?;
        positive("time_gap", self.time_gap)?;
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(Error::invalid(
                "noise_amplitude",
                format!("must be finite and >= 0, got {}", self.noise_amplitude),
            ));
        }
        let critical = self.critical_spacing();
        if !(critical.is_finite() && critical > self.jam_spacing) {
            return Err(Error::invalid(
                "free_flow_speed",
                "critical spacing s_j + u0*tau must be finite and exceed s_j",
            ));
        }
        Ok(())
    }

    /// Same parameters with the noise switched off.
    pub fn noiseless(self) -> Self {
        Self {
            noise_amplitude: 0.0,
            ..self
        }
    }

    pub fn with_noise_model(self, noise_model: NoiseModel) -> Self {
        Self { noise_model, ..self }
    }

    /// Spacing at which the congested branch reaches free flow, `s_j + u0*tau`.
    pub fn critical_spacing(&self) -> f64 {
        self.jam_spacing + self.free_flow_speed * self.time_gap
    }

    /// `min(u0, (s - s_j) / tau)`. Negative below the jam spacing; clamping
    /// is left to [`next_speed`].
    pub fn equilibrium_speed(&self, spacing: f64) -> f64 {
        self.free_flow_speed.min((spacing - self.jam_spacing) / self.time_gap)
    }

    /// Congested-branch inverse of [`Self::equilibrium_speed`], `s_j + tau*v`.
    pub fn equilibrium_spacing(&self, speed: f64) -> f64 {
        self.jam_spacing + self.time_gap * speed
    }

    pub(crate) fn clamp_speed(&self, speed: f64) -> f64 {
        speed.max(0.0).min(self.free_flow_speed)
    }
}

/// Free function form of [`ModelParams::equilibrium_speed`].
pub fn equilibrium_speed(spacing: f64, params: &ModelParams) -> f64 {
    params.equilibrium_speed(spacing)
}

/// The seven vehicle classes, by sensing and connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VehicleKind {
    /// Human-driven: own spacing, noisy.
    #[serde(rename = "HV")]
    Hv,
    /// Automated: own spacing, exact.
    #[serde(rename = "AV")]
    Av,
    /// Multi-anticipation automated: mean of own and predecessor's spacing, exact.
    #[serde(rename = "MAV")]
    Mav,
    /// Partially connected: mean spacing over all connected vehicles, noisy.
    #[serde(rename = "PCV")]
    Pcv,
    /// Partially connected and automated: as PCV, exact.
    #[serde(rename = "PCAV")]
    Pcav,
    /// Fully connected: road-wide mean spacing, noisy.
    #[serde(rename = "FCV")]
    Fcv,
    /// Fully connected and automated: road-wide mean spacing, exact.
    #[serde(rename = "FCAV")]
    Fcav,
}

impl VehicleKind {
    pub const ALL: [VehicleKind; 7] = [
        VehicleKind::Hv,
        VehicleKind::Av,
        VehicleKind::Mav,
        VehicleKind::Pcv,
        VehicleKind::Pcav,
        VehicleKind::Fcv,
        VehicleKind::Fcav,
    ];

    pub fn abbreviation(self) -> &'static str {
        match self {
            VehicleKind::Hv => "HV",
            VehicleKind::Av => "AV",
            VehicleKind::Mav => "MAV",
            VehicleKind::Pcv => "PCV",
            VehicleKind::Pcav => "PCAV",
            VehicleKind::Fcv => "FCV",
            VehicleKind::Fcav => "FCAV",
        }
    }

    /// Whether the vehicle measures spacing with error.
    pub fn is_noisy(self) -> bool {
        matches!(self, VehicleKind::Hv | VehicleKind::Pcv | VehicleKind::Fcv)
    }

    pub fn is_partially_connected(self) -> bool {
        matches!(self, VehicleKind::Pcv | VehicleKind::Pcav)
    }

    pub fn is_fully_connected(self) -> bool {
        matches!(self, VehicleKind::Fcv | VehicleKind::Fcav)
    }

    /// Noise amplitude this kind actually applies under `params`.
    pub fn effective_noise(self, params: &ModelParams) -> f64 {
        if self.is_noisy() {
            params.noise_amplitude
        } else {
            0.0
        }
    }
}

impl fmt::Display for VehicleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.abbreviation())
    }
}

impl FromStr for VehicleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VehicleKind::ALL
            .into_iter()
            .find(|k| k.abbreviation().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::invalid(
                    "kind",
                    format!("unknown vehicle kind `{s}` (expected HV, AV, MAV, PCV, PCAV, FCV or FCAV)"),
                )
            })
    }
}

/// What a vehicle knows about the traffic around it at one update instant.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpacingContext<'a> {
    /// Spacing to the predecessor, m.
    pub own_spacing: f64,
    /// Predecessor's own spacing, m. Needed by MAV.
    pub leader_spacing: Option<f64>,
    /// Spacings reported by every partially connected vehicle, this one
    /// included. Needed by PCV and PCAV.
    pub connected_spacings: &'a [f64],
    /// Road-wide mean spacing, i.e. inverse density, m. Needed by FCV and FCAV.
    pub mean_spacing: Option<f64>,
}

impl<'a> SpacingContext<'a> {
    pub fn own(own_spacing: f64) -> Self {
        Self {
            own_spacing,
            ..Self::default()
        }
    }
}

/// Spacing the vehicle steers towards, according to its class.
pub fn desired_spacing(kind: VehicleKind, ctx: &SpacingContext<'_>) -> Result<f64> {
    let missing = |field| Error::MissingContext {
        kind,
        vehicle: None,
        field,
    };
    match kind {
        VehicleKind::Hv | VehicleKind::Av => Ok(ctx.own_spacing),
        VehicleKind::Mav => {
            let leader = ctx.leader_spacing.ok_or_else(|| missing("leader_spacing"))?;
            Ok((ctx.own_spacing + leader) / 2.0)
        }
        VehicleKind::Pcv | VehicleKind::Pcav => {
            if ctx.connected_spacings.is_empty() {
                return Err(missing("connected_spacings"));
            }
            let sum: f64 = ctx.connected_spacings.iter().sum();
            Ok(sum / ctx.connected_spacings.len() as f64)
        }
        VehicleKind::Fcv | VehicleKind::Fcav => ctx.mean_spacing.ok_or_else(|| missing("mean_spacing")),
    }
}

/// Speed one update interval ahead.
///
/// `noise_sample` is a standard-normal draw; it is ignored by exact-sensing
/// kinds. The result always lies in `[0, u0]`.
pub fn next_speed(kind: VehicleKind, ctx: &SpacingContext<'_>, params: &ModelParams, noise_sample: f64) -> Result<f64> {
    let desired = desired_spacing(kind, ctx)?;
    let sigma = kind.effective_noise(params);
    let raw = if sigma > 0.0 {
        match params.noise_model {
            NoiseModel::SpacingPerception => params.equilibrium_speed(desired + sigma * noise_sample),
            NoiseModel::SpeedPerUpdate => params.equilibrium_speed(desired) + sigma * noise_sample,
        }
    } else {
        params.equilibrium_speed(desired)
    };
    Ok(params.clamp_speed(raw))
}
