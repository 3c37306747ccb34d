//! Speed fluctuations grow like the square root of the platoon position.
//!
//!     cargo run --release --example sqrt_growth -- [runs]

use stopgo::config::ExperimentConfig;
use stopgo::ensemble::run_ensemble;
use stopgo::metrics::growth_exponent;
use stopgo::model::VehicleKind;

fn main() -> stopgo::Result<()> {
    let mut cfg = ExperimentConfig::preset("fig3b")?;
    cfg.runs = std::env::args().nth(1).map_or(200, |r| r.parse().expect("runs"));
    let curve = run_ensemble(&cfg.ensemble_spec(VehicleKind::Hv, 0.0))?;
    for n in [1, 10, 25, 50, 100] {
        println!(
            "vehicle {n:>3}: std {:.3} +/- {:.3} m/s   std/sqrt(n) {:.3}",
            curve.mean[n - 1],
            curve.stderr[n - 1],
            curve.mean[n - 1] / (n as f64).sqrt()
        );
    }
    println!(
        "log-log slope over 10..100: {:.3}",
        growth_exponent(&curve.mean, 10..=100)?
    );
    Ok(())
}
