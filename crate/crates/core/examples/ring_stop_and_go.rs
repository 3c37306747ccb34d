//! Phantom jams on a 2.5 km ring: 100 human drivers alone, then with 2% of
//! them replaced by each automated kind. Prints speed ranges over the last
//! five minutes and writes one trajectory SVG per fleet.
//!
//!     cargo run --release --example ring_stop_and_go -- [seed]

use stopgo::config::ExperimentConfig;
use stopgo::model::VehicleKind;
use stopgo::{io, svg};

fn main() -> stopgo::Result<()> {
    let mut cfg = ExperimentConfig::preset("fig5")?;
    if let Some(seed) = std::env::args().nth(1) {
        cfg.seed = seed.parse().expect("seed must be an integer");
    }
    std::fs::create_dir_all("out")?;
    let fleets = [(VehicleKind::Hv, 0.0)]
        .into_iter()
        .chain(cfg.kinds.clone().into_iter().map(|k| (k, 0.02)));
    for (kind, mpr) in fleets {
        let mut c = cfg.clone();
        c.kinds = vec![kind];
        c.mprs = vec![mpr];
        let record = c.run_single()?;
        let from = record.n_samples() - 200;
        let speeds: Vec<f64> = (from..record.n_samples())
            .flat_map(|k| record.speed_row(k).to_vec())
            .collect();
        let lo = speeds.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = speeds.iter().copied().fold(0.0, f64::max);
        println!("{kind:<5} last 5 min: speeds {lo:5.2}..{hi:5.2} m/s");

        let rows = io::trajectory_rows(&record);
        let title = format!("ring 2.5 km, {kind}");
        let doc = svg::trajectory_svg(&rows, c.params.free_flow_speed, record.ring_length, &title);
        std::fs::write(format!("out/ring-{kind}.svg"), doc)?;
    }
    Ok(())
}
