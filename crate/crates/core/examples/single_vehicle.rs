//! One intelligent vehicle among 100: how much does it calm the tail of the
//! platoon? Compares every kind against the all-human baseline.
//!
//!     cargo run --release --example single_vehicle -- [runs] [fixed|random]

use stopgo::config::ExperimentConfig;
use stopgo::ensemble::compare_kinds;

fn main() -> stopgo::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().map_or(200, |r| r.parse().expect("runs"));
    // fig2 pins the vehicle at position 50; fig3b places it at random
    let preset = match args.next().as_deref() {
        Some("fixed") => "fig2",
        _ => "fig3b",
    };
    let mut cfg = ExperimentConfig::preset(preset)?;
    cfg.runs = runs;
    let specs: Vec<_> = cfg.kinds.iter().map(|&k| cfg.ensemble_spec(k, cfg.mprs[0])).collect();
    let table = compare_kinds(&specs)?;
    println!("{preset}: std at vehicle #100, {runs} runs");
    for r in &table.rows {
        println!(
            "{:<5} {:.3} +/- {:.3} m/s   reduction {:5.1} +/- {:.1} %",
            r.kind, r.mean, r.stderr, r.reduction_pct, r.reduction_stderr
        );
    }
    Ok(())
}
