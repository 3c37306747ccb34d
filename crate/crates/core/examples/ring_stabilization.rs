//! Over-time speed deviation on a 6 km ring with 200 vehicles. Prints the
//! mean over the last five minutes per kind and plots the curves.
//!
//!     cargo run --release --example ring_stabilization -- [mpr%] [runs]

use stopgo::config::ExperimentConfig;
use stopgo::ensemble::run_ensemble;
use stopgo::model::VehicleKind;
use stopgo::svg::{self, Series};

fn main() -> stopgo::Result<()> {
    let mut args = std::env::args().skip(1);
    let pct = args.next().unwrap_or_else(|| "1".into());
    let mut cfg = ExperimentConfig::preset(&format!("fig6-mpr{pct}"))?;
    cfg.runs = args.next().map_or(40, |r| r.parse().expect("runs"));
    let dt = cfg.params.time_gap;

    let mut series = Vec::new();
    let fleets = [(VehicleKind::Hv, 0.0)]
        .into_iter()
        .chain(cfg.kinds.iter().map(|&k| (k, cfg.mprs[0])));
    for (kind, mpr) in fleets {
        let curve = run_ensemble(&cfg.ensemble_spec(kind, mpr))?;
        let (tail, err) = curve.tail(dt, 300.0);
        println!("{kind:<5} tail {tail:.3} +/- {err:.3} m/s");
        series.push(Series {
            label: kind.to_string(),
            points: curve
                .mean
                .iter()
                .enumerate()
                .map(|(k, &m)| (k as f64 * dt / 60.0, m))
                .collect(),
        });
    }
    std::fs::create_dir_all("out")?;
    let title = format!("6 km ring, {pct}% penetration");
    std::fs::write(
        "out/ring_stabilization.svg",
        svg::curves_svg(&series, &title, "time (min)", "speed std (m/s)"),
    )?;
    Ok(())
}
