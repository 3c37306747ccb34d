use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use stopgo::ensemble::{aggregate, EnsembleCurve};
use stopgo::io;
use stopgo::metrics::sample_std;
use stopgo::model::{next_speed, ModelParams, NoiseModel, SpacingContext, VehicleKind};
use stopgo::scenario::{self, FleetConfig, Geometry, Scenario};

use VehicleKind::*;

fn any_kind() -> impl Strategy<Value = VehicleKind> {
    proptest::sample::select(VehicleKind::ALL.to_vec())
}

fn any_noise_model() -> impl Strategy<Value = NoiseModel> {
    prop_oneof![Just(NoiseModel::SpacingPerception), Just(NoiseModel::SpeedPerUpdate)]
}

fn params_with(sigma: f64, model: NoiseModel) -> ModelParams {
    ModelParams {
        noise_amplitude: sigma,
        ..ModelParams::default()
    }
    .with_noise_model(model)
}

/// Kinds without the noisy connected ones, whose gaps random-walk into collisions.
fn stable_kind() -> impl Strategy<Value = VehicleKind> {
    proptest::sample::select(vec![Av, Mav, Pcav, Fcav])
}

proptest! {
    #[test]
    fn speed_stays_in_bounds(
        kind in any_kind(),
        model in any_noise_model(),
        sigma in 0.0..5.0f64,
        own in 0.0..200.0f64,
        lead in 0.0..200.0f64,
        others in proptest::collection::vec(0.0..200.0f64, 0..6),
        mean in 1.0..200.0f64,
        z in -8.0..8.0f64,
    ) {
        let params = params_with(sigma, model);
        let mut connected = others;
        connected.push(own);
        let ctx = SpacingContext {
            own_spacing: own,
            leader_spacing: Some(lead),
            connected_spacings: &connected,
            mean_spacing: Some(mean),
        };
        let v = next_speed(kind, &ctx, &params, z).unwrap();
        prop_assert!((0.0..=params.free_flow_speed).contains(&v));
    }

    #[test]
    fn exact_kinds_ignore_noise(
        kind in stable_kind(),
        own in 0.0..100.0f64,
        lead in 0.0..100.0f64,
        mean in 1.0..100.0f64,
        draws in proptest::collection::vec(-5.0..5.0f64, 100),
    ) {
        let params = ModelParams::default();
        let connected = [own, lead];
        let ctx = SpacingContext {
            own_spacing: own,
            leader_spacing: Some(lead),
            connected_spacings: &connected,
            mean_spacing: Some(mean),
        };
        let base = next_speed(kind, &ctx, &params, 0.0).unwrap();
        for z in draws {
            prop_assert_eq!(next_speed(kind, &ctx, &params, z).unwrap().to_bits(), base.to_bits());
        }
    }

    #[test]
    fn lone_pcav_is_av(own in 0.0..200.0f64, z in -5.0..5.0f64) {
        let params = ModelParams::default();
        let connected = [own];
        let ctx = SpacingContext { connected_spacings: &connected, ..SpacingContext::own(own) };
        prop_assert_eq!(
            next_speed(Pcav, &ctx, &params, z).unwrap().to_bits(),
            next_speed(Av, &SpacingContext::own(own), &params, z).unwrap().to_bits()
        );
    }

    #[test]
    fn noiseless_draw_makes_pcv_pcav(
        model in any_noise_model(),
        spacings in proptest::collection::vec(0.0..200.0f64, 1..8),
    ) {
        let params = params_with(0.25, model);
        let ctx = SpacingContext { connected_spacings: &spacings, ..SpacingContext::own(spacings[0]) };
        prop_assert_eq!(
            next_speed(Pcv, &ctx, &params, 0.0).unwrap().to_bits(),
            next_speed(Pcav, &ctx, &params, 0.0).unwrap().to_bits()
        );
    }

    #[test]
    fn equilibrium_speed_monotone_and_affine(a in 0.0..100.0f64, b in 0.0..100.0f64) {
        let p = ModelParams::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(p.equilibrium_speed(lo) <= p.equilibrium_speed(hi));
        let (s0, s1) = (p.jam_spacing, p.critical_spacing());
        if lo > s0 && hi < s1 && hi - lo > 1e-6 {
            let slope = (p.equilibrium_speed(hi) - p.equilibrium_speed(lo)) / (hi - lo);
            prop_assert!((slope - 1.0 / p.time_gap).abs() < 1e-6);
        }
    }
}

fn mixed_fleet(n: usize, kind: VehicleKind, mpr: f64, seed: u64) -> Vec<VehicleKind> {
    let mut rng = scenario::placement_rng(seed);
    scenario::place_intelligent(n, mpr, kind, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ring_conserves_length(
        n in 10usize..80,
        density in 12.0..40.0f64,
        kind in stable_kind(),
        mpr in 0.0..0.3f64,
        seed in any::<u64>(),
    ) {
        let length = n as f64 * density;
        let geometry = Geometry::Ring { length };
        let params = ModelParams::default();
        let fleet = FleetConfig::for_geometry(&geometry, mixed_fleet(n, kind, mpr, seed), &params);
        let sc = Scenario::new(geometry, fleet, params).unwrap();
        let mut state = sc.initial_state();
        let mut rng = scenario::noise_rng(seed);
        for _ in 0..300 {
            if sc.step(&mut state, &mut rng).is_err() {
                break;
            }
            let total: f64 = state.spacings.iter().sum();
            prop_assert!((total - length).abs() <= 1e-9 * length, "sum {} vs {}", total, length);
        }
    }

    #[test]
    fn update_order_is_irrelevant(
        n in 2usize..60,
        kind in any_kind(),
        mpr in 0.0..0.5f64,
        ring in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let params = ModelParams::default();
        let geometry = if ring {
            Geometry::Ring { length: n as f64 * 25.0 }
        } else {
            Geometry::OpenRoad { leader_speed: 9.0 }
        };
        let fleet = FleetConfig::for_geometry(&geometry, mixed_fleet(n, kind, mpr, seed), &params);
        let sc = Scenario::new(geometry, fleet, params).unwrap();
        let (mut a, mut b) = (sc.initial_state(), sc.initial_state());
        let mut rng = scenario::noise_rng(seed);
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..50 {
            let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            order.shuffle(&mut rng);
            let ra = sc.step_with_noise(&mut a, &noise);
            let rb = sc.step_in_order(&mut b, &noise, &order);
            prop_assert_eq!(ra.is_ok(), rb.is_ok());
            prop_assert_eq!(&a.speeds, &b.speeds);
            prop_assert_eq!(&a.spacings, &b.spacings);
            if ra.is_err() {
                break;
            }
        }
    }

    #[test]
    fn noiseless_equilibrium_never_closes_in(
        n in 2usize..60,
        kind in any_kind(),
        mpr in 0.0..1.0f64,
        spacing in 8.0..60.0f64,
        ring in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let params = ModelParams::default().noiseless();
        let geometry = if ring {
            Geometry::Ring { length: n as f64 * spacing }
        } else {
            Geometry::OpenRoad { leader_speed: params.equilibrium_speed(spacing) }
        };
        let fleet = FleetConfig::new(mixed_fleet(n, kind, mpr, seed), spacing);
        let record = scenario::run(geometry, fleet, params, seed, 200).unwrap();
        for k in 0..record.n_samples() {
            for i in 0..n {
                let ahead = if i == 0 {
                    record.leader.as_ref().map_or(record.position(k, n - 1) + geometry_len(&geometry), |l| l.positions[k])
                } else {
                    record.position(k, i - 1)
                };
                prop_assert!(ahead - record.position(k, i) >= params.jam_spacing - 1e-9);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(kind in any_kind(), mpr in 0.0..0.3f64, seed in any::<u64>()) {
        let params = ModelParams::default();
        let geometry = Geometry::OpenRoad { leader_speed: params.equilibrium_speed(22.0) };
        let run = || {
            let fleet = FleetConfig::new(mixed_fleet(40, kind, mpr, seed), 22.0);
            scenario::run(geometry, fleet, params, seed, 200)
        };
        match (run(), run()) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "one run failed, the other did not"),
        }
    }
}

fn geometry_len(g: &Geometry) -> f64 {
    match g {
        Geometry::Ring { length } => *length,
        Geometry::OpenRoad { .. } => f64::INFINITY,
    }
}

proptest! {
    #[test]
    fn std_scales_and_ignores_order(
        mut xs in proptest::collection::vec(-50.0..50.0f64, 2..60),
        c in -10.0..10.0f64,
        seed in any::<u64>(),
    ) {
        let base = sample_std(xs.iter().copied()).unwrap();
        let scaled = sample_std(xs.iter().map(|x| c * x)).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-9 * (1.0 + scaled));
        let mut rng = scenario::noise_rng(seed);
        xs.shuffle(&mut rng);
        let shuffled = sample_std(xs.iter().copied()).unwrap();
        prop_assert!((shuffled - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn ensemble_csv_round_trips(
        curves in proptest::collection::vec(proptest::collection::vec(0.0..1e4f64, 5), 1..5),
        first in 0usize..2,
    ) {
        let curve = aggregate(&curves).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        io::write_file(&path, |w| io::write_ensemble(&curve, first, w)).unwrap();
        let (index, back): (Vec<usize>, EnsembleCurve) = io::read_ensemble(&path).unwrap();
        prop_assert_eq!(index, (first..first + 5).collect::<Vec<_>>());
        for (a, b) in curve.mean.iter().zip(&back.mean).chain(curve.stderr.iter().zip(&back.stderr)) {
            prop_assert_eq!(io::fmt_sig9(*a).parse::<f64>().unwrap(), *b);
            prop_assert!((a - b).abs() <= 5e-9 * a.abs());
        }
        // a second write of what was read is byte-identical
        let again = dir.path().join("again.csv");
        io::write_file(&again, |w| io::write_ensemble(&back, first, w)).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn trajectory_csv_round_trips(kind in any_kind(), seed in any::<u64>(), ring in any::<bool>()) {
        let params = ModelParams::default();
        let geometry = if ring {
            Geometry::Ring { length: 250.0 }
        } else {
            Geometry::OpenRoad { leader_speed: 9.0 }
        };
        let mut kinds = vec![Hv; 10];
        kinds[4] = kind;
        let fleet = FleetConfig::for_geometry(&geometry, kinds, &params);
        let Ok(record) = scenario::run(geometry, fleet, params, seed, 40) else {
            return Ok(());
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        io::write_file(&path, |w| io::write_trajectory(&record, w)).unwrap();
        let back = io::read_trajectory(&path).unwrap();
        let rows = io::trajectory_rows(&record);
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(a.vehicle, b.vehicle);
            prop_assert_eq!(&a.kind, &b.kind);
            for (x, y) in [(a.t, b.t), (a.position, b.position), (a.speed, b.speed)] {
                prop_assert_eq!(io::fmt_sig9(x).parse::<f64>().unwrap(), y);
            }
        }
    }
}
