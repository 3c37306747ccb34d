//! One open-road run of 100 human drivers starting at 22 m spacing behind a
//! leader at constant speed. Writes the trajectory CSV and SVG.
//!
//!     cargo run --release --example trajectories -- [seed] [out_dir]

use stopgo::config::ExperimentConfig;
use stopgo::{io, svg};

fn main() -> stopgo::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::preset("fig1")?;
    if let Some(seed) = args.next() {
        cfg.seed = seed.parse().expect("seed must be an integer");
    }
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "out".into()));

    let record = cfg.run_single()?;
    let last = record.n_vehicles() - 1;
    let tail: Vec<f64> = record.vehicle_speeds(last).collect();
    let stopped = tail.iter().filter(|&&v| v == 0.0).count();
    println!(
        "{} vehicles, {} s; last vehicle stopped in {} of {} samples, speeds {:.2}..{:.2} m/s",
        record.n_vehicles(),
        record.duration(),
        stopped,
        tail.len(),
        record.min_speed(),
        record.max_speed()
    );

    io::write_file(out.join("trajectories.csv"), |w| io::write_trajectory(&record, w))?;
    let rows = io::trajectory_rows(&record);
    let doc = svg::trajectory_svg(&rows, cfg.params.free_flow_speed, None, "open road, 22 m start");
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("trajectories.svg"), doc)?;
    println!("wrote {}", out.join("trajectories.{csv,svg}").display());
    Ok(())
}
