//! Fleet-wide stepping on an open road behind a constant-speed leader or on
//! a ring road.
//!
//! The state is kept in spacing coordinates: every update reads the spacings
//! at time `t`, computes all speeds at `t + tau` at once, and then moves the
//! spacings by `tau * (v_pred - v_self)`. Odometer positions are integrated
//! alongside for trajectory output only.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{next_speed, ModelParams, SpacingContext, VehicleKind};

/// ChaCha stream used for the per-vehicle speed noise of a run.
pub const NOISE_STREAM: u64 = 1;
/// ChaCha stream used for placing intelligent vehicles in a run.
pub const PLACEMENT_STREAM: u64 = 0;

/// Road layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    /// Platoon of followers behind a leader that never changes speed.
    OpenRoad { leader_speed: f64 },
    /// Closed loop of the given length; every vehicle follows another.
    Ring { length: f64 },
}

impl Geometry {
    pub fn is_ring(&self) -> bool {
        matches!(self, Geometry::Ring { .. })
    }

    /// Uniform starting spacing a fleet of `n` takes when none is given:
    /// `L / N` on the ring, the leader's equilibrium spacing on the open road.
    pub fn natural_spacing(&self, n_vehicles: usize, params: &ModelParams) -> f64 {
        match *self {
            Geometry::OpenRoad { leader_speed } => params.equilibrium_spacing(leader_speed),
            Geometry::Ring { length } => length / n_vehicles as f64,
        }
    }
}

/// Vehicle classes in platoon order plus the uniform starting spacing.
///
/// Index 0 is the first follower on the open road. On the ring, vehicle 0
/// follows vehicle `N - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetConfig {
    pub kinds: Vec<VehicleKind>,
    pub initial_spacing: f64,
}

impl FleetConfig {
    pub fn new(kinds: Vec<VehicleKind>, initial_spacing: f64) -> Self {
        Self { kinds, initial_spacing }
    }

    /// Fleet placed at the geometry's natural spacing.
    pub fn for_geometry(geometry: &Geometry, kinds: Vec<VehicleKind>, params: &ModelParams) -> Self {
        let spacing = geometry.natural_spacing(kinds.len(), params);
        Self::new(kinds, spacing)
    }

    pub fn homogeneous(kind: VehicleKind, n_vehicles: usize, initial_spacing: f64) -> Self {
        Self::new(vec![kind; n_vehicles], initial_spacing)
    }

    pub fn n_vehicles(&self) -> usize {
        self.kinds.len()
    }
}

/// Positions and speeds of the fleet at one update instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioState {
    pub step: usize,
    pub time_step: f64,
    /// Spacing of each vehicle to its predecessor, m.
    pub spacings: Vec<f64>,
    pub speeds: Vec<f64>,
    /// Unwrapped odometer positions, m.
    pub positions: Vec<f64>,
    /// Open road only.
    pub leader_position: Option<f64>,
}

impl ScenarioState {
    pub fn time(&self) -> f64 {
        self.step as f64 * self.time_step
    }
}

/// Full history of one run; the input to the metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Sampling interval, s.
    pub dt: f64,
    pub kinds: Vec<VehicleKind>,
    /// Row-major `[sample][vehicle]`, m/s.
    pub speeds: Vec<f64>,
    /// Row-major `[sample][vehicle]`, unwrapped, m.
    pub positions: Vec<f64>,
    pub leader: Option<LeaderTrack>,
    pub ring_length: Option<f64>,
}

/// The deterministic open-road leader.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderTrack {
    pub speed: f64,
    /// One entry per sample, m.
    pub positions: Vec<f64>,
}

impl RunRecord {
    pub fn n_vehicles(&self) -> usize {
        self.kinds.len()
    }

    /// Number of recorded instants, initial state included.
    pub fn n_samples(&self) -> usize {
        if self.kinds.is_empty() {
            0
        } else {
            self.speeds.len() / self.kinds.len()
        }
    }

    pub fn time(&self, sample: usize) -> f64 {
        sample as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.time(self.n_samples().saturating_sub(1))
    }

    pub fn speed(&self, sample: usize, vehicle: usize) -> f64 {
        self.speeds[sample * self.n_vehicles() + vehicle]
    }

    pub fn position(&self, sample: usize, vehicle: usize) -> f64 {
        self.positions[sample * self.n_vehicles() + vehicle]
    }

    pub fn speed_row(&self, sample: usize) -> &[f64] {
        let n = self.n_vehicles();
        &self.speeds[sample * n..(sample + 1) * n]
    }

    pub fn vehicle_speeds(&self, vehicle: usize) -> impl Iterator<Item = f64> + '_ {
        self.speeds.iter().skip(vehicle).step_by(self.n_vehicles()).copied()
    }

    /// Position folded into `[0, L)` on the ring; unchanged on the open road.
    pub fn wrapped_position(&self, sample: usize, vehicle: usize) -> f64 {
        let x = self.position(sample, vehicle);
        match self.ring_length {
            Some(length) => x.rem_euclid(length),
            None => x,
        }
    }

    pub fn min_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A validated geometry, fleet and parameter set.
#[derive(Debug, Clone)]
pub struct Scenario {
    geometry: Geometry,
    fleet: FleetConfig,
    params: ModelParams,
}

impl Scenario {
    pub fn new(geometry: Geometry, fleet: FleetConfig, params: ModelParams) -> Result<Self> {
        params.validate()?;
        let n = fleet.n_vehicles();
        if n == 0 {
            return Err(Error::invalid("n_vehicles", "fleet is empty"));
        }
        let spacing = fleet.initial_spacing;
        if !(spacing.is_finite() && spacing >= params.jam_spacing) {
            return Err(Error::Infeasible(format!(
                "initial spacing {spacing} m is below the jam spacing {} m",
                params.jam_spacing
            )));
        }
        match geometry {
            Geometry::OpenRoad { leader_speed } => {
                if !(0.0..=params.free_flow_speed).contains(&leader_speed) {
                    return Err(Error::invalid(
                        "leader_speed",
                        format!("must lie in [0, {}], got {leader_speed}", params.free_flow_speed),
                    ));
                }
            }
            Geometry::Ring { length } => {
                let jam = n as f64 * params.jam_spacing;
                if !(length.is_finite() && length > jam) {
                    return Err(Error::Infeasible(format!(
                        "ring of {length} m cannot hold {n} vehicles (jam length {jam} m)"
                    )));
                }
                let packed = n as f64 * spacing;
                if (packed - length).abs() > 1e-9 * length {
                    return Err(Error::Infeasible(format!(
                        "{n} vehicles at {spacing} m span {packed} m, ring length is {length} m"
                    )));
                }
            }
        }
        Ok(Self {
            geometry,
            fleet,
            params,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn fleet(&self) -> &FleetConfig {
        &self.fleet
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_vehicles(&self) -> usize {
        self.fleet.n_vehicles()
    }

    /// Uniform spacing, everyone at the equilibrium speed of that spacing.
    pub fn initial_state(&self) -> ScenarioState {
        let n = self.n_vehicles();
        let s0 = self.fleet.initial_spacing;
        let v0 = self.params.clamp_speed(self.params.equilibrium_speed(s0));
        let positions = (0..n).map(|i| (n - 1 - i) as f64 * s0).collect();
        let leader_position = match self.geometry {
            Geometry::OpenRoad { .. } => Some(n as f64 * s0),
            Geometry::Ring { .. } => None,
        };
        ScenarioState {
            step: 0,
            time_step: self.params.time_gap,
            spacings: vec![s0; n],
            speeds: vec![v0; n],
            positions,
            leader_position,
        }
    }

    /// Index of the vehicle ahead of `i`, `None` for the open-road leader.
    fn predecessor(&self, i: usize) -> Option<usize> {
        match (i, self.geometry) {
            (0, Geometry::OpenRoad { .. }) => None,
            (0, Geometry::Ring { .. }) => Some(self.n_vehicles() - 1),
            (i, _) => Some(i - 1),
        }
    }

    /// Advance one interval, drawing one standard-normal sample per vehicle.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut ScenarioState, rng: &mut R) -> Result<()> {
        let noise: Vec<f64> = (0..self.n_vehicles()).map(|_| rng.sample(StandardNormal)).collect();
        self.step_with_noise(state, &noise)
    }

    /// Advance one interval with caller-supplied noise, one draw per vehicle.
    pub fn step_with_noise(&self, state: &mut ScenarioState, noise: &[f64]) -> Result<()> {
        let order: Vec<usize> = (0..self.n_vehicles()).collect();
        self.step_in_order(state, noise, &order)
    }

    /// Same as [`Self::step_with_noise`], visiting vehicles in `order` while
    /// computing speeds. The result does not depend on the order.
    pub fn step_in_order(&self, state: &mut ScenarioState, noise: &[f64], order: &[usize]) -> Result<()> {
        let n = self.n_vehicles();
        assert_eq!(noise.len(), n, "one noise sample per vehicle");
        assert_eq!(order.len(), n, "order must visit every vehicle");
        let tau = self.params.time_gap;

        let connected: Vec<f64> = self
            .fleet
            .kinds
            .iter()
            .zip(&state.spacings)
            .filter(|(k, _)| k.is_partially_connected())
            .map(|(_, &s)| s)
            .collect();
        let mean_spacing = match self.geometry {
            Geometry::Ring { length } => length / n as f64,
            Geometry::OpenRoad { .. } => state.spacings.iter().sum::<f64>() / n as f64,
        };

        let mut new_speeds = vec![0.0; n];
        for &i in order {
            let kind = self.fleet.kinds[i];
            let own = state.spacings[i];
            let ctx = SpacingContext {
                own_spacing: own,
                // the open-road leader has no spacing of its own: fall back to ours
                leader_spacing: Some(self.predecessor(i).map_or(own, |p| state.spacings[p])),
                connected_spacings: &connected,
                mean_spacing: Some(mean_spacing),
            };
            new_speeds[i] = next_speed(kind, &ctx, &self.params, noise[i]).map_err(|e| match e {
                Error::MissingContext { kind, field, .. } => Error::MissingContext {
                    kind,
                    vehicle: Some(i + 1),
                    field,
                },
                other => other,
            })?;
        }

        let next_step = state.step + 1;
        let leader_speed = match self.geometry {
            Geometry::OpenRoad { leader_speed } => Some(leader_speed),
            Geometry::Ring { .. } => None,
        };
        for i in 0..n {
            let ahead = match self.predecessor(i) {
                Some(p) => new_speeds[p],
                None => leader_speed.expect("open road has a leader"),
            };
            state.spacings[i] += tau * (ahead - new_speeds[i]);
            state.positions[i] += tau * new_speeds[i];
        }
        if let Some((vehicle, &spacing)) = state.spacings.iter().enumerate().find(|(_, &s)| s < 0.0 || s.is_nan()) {
            return Err(Error::Collision {
                step: next_step,
                vehicle: vehicle + 1,
                spacing,
            });
        }
        if let (Some(x), Some(v)) = (state.leader_position.as_mut(), leader_speed) {
            let x0 = n as f64 * self.fleet.initial_spacing;
            *x = x0 + next_step as f64 * tau * v;
        }
        state.speeds = new_speeds;
        state.step = next_step;
        Ok(())
    }

    /// Run `n_steps` updates with the noise stream of `seed`.
    pub fn run(&self, seed: u64, n_steps: usize) -> Result<RunRecord> {
        let mut rng = noise_rng(seed);
        self.run_with_rng(&mut rng, n_steps)
    }

    pub fn run_with_rng<R: Rng + ?Sized>(&self, rng: &mut R, n_steps: usize) -> Result<RunRecord> {
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        let n = self.n_vehicles();
        let samples = n_steps + 1;
        let mut state = self.initial_state();
        let mut speeds = Vec::with_capacity(samples * n);
        let mut positions = Vec::with_capacity(samples * n);
        let mut leader_positions = Vec::new();
        let mut record = |state: &ScenarioState| {
            speeds.extend_from_slice(&state.speeds);
            positions.extend_from_slice(&state.positions);
            if let Some(x) = state.leader_position {
                leader_positions.push(x);
            }
        };
        record(&state);
        let mut noise = vec![0.0; n];
        for _ in 0..n_steps {
            for z in noise.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            self.step_with_noise(&mut state, &noise)?;
            record(&state);
        }
        let leader = match self.geometry {
            Geometry::OpenRoad { leader_speed } => Some(LeaderTrack {
                speed: leader_speed,
                positions: leader_positions,
            }),
            Geometry::Ring { .. } => None,
        };
        Ok(RunRecord {
            dt: self.params.time_gap,
            kinds: self.fleet.kinds.clone(),
            speeds,
            positions,
            leader,
            ring_length: match self.geometry {
                Geometry::Ring { length } => Some(length),
                Geometry::OpenRoad { .. } => None,
            },
        })
    }
}

/// Validate the inputs and return the starting state.
pub fn init_scenario(geometry: Geometry, fleet: FleetConfig, params: ModelParams) -> Result<ScenarioState> {
    Ok(Scenario::new(geometry, fleet, params)?.initial_state())
}

/// One seeded run. Identical inputs give bit-identical records.
pub fn run(
    geometry: Geometry,
    fleet: FleetConfig,
    params: ModelParams,
    seed: u64,
    n_steps: usize,
) -> Result<RunRecord> {
    Scenario::new(geometry, fleet, params)?.run(seed, n_steps)
}

pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    rng
}

pub fn placement_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PLACEMENT_STREAM);
    rng
}

/// Number of equipped vehicles for a penetration rate, `round(mpr * n)`.
pub fn equipped_count(n_vehicles: usize, mpr: f64) -> usize {
    (mpr * n_vehicles as f64).round() as usize
}

/// Assign `kind` to `round(mpr * n)` distinct uniformly drawn positions;
/// everyone else is human-driven.
pub fn place_intelligent<R: Rng + ?Sized>(
    n_vehicles: usize,
    mpr: f64,
    kind: VehicleKind,
    rng: &mut R,
) -> Result<Vec<VehicleKind>> {
    if !(0.0..=1.0).contains(&mpr) {
        return Err(Error::invalid("mpr", format!("must lie in [0, 1], got {mpr}")));
    }
    let count = equipped_count(n_vehicles, mpr);
    if count == 0 && mpr > 0.0 {
        log::warn!("mpr {mpr} rounds to zero {kind} vehicles out of {n_vehicles}; fleet is all HV");
    }
    let mut kinds = vec![VehicleKind::Hv; n_vehicles];
    for i in index::sample(rng, n_vehicles, count) {
        kinds[i] = kind;
    }
    Ok(kinds)
}

/// Assign `kind` at the given zero-based platoon indices.
pub fn place_at(n_vehicles: usize, positions: &[usize], kind: VehicleKind) -> Result<Vec<VehicleKind>> {
    let mut kinds = vec![VehicleKind::Hv; n_vehicles];
    for &i in positions {
        let slot = kinds
            .get_mut(i)
            .ok_or_else(|| Error::invalid("positions", format!("index {i} outside fleet of {n_vehicles}")))?;
        *slot = kind;
    }
    Ok(kinds)
}
