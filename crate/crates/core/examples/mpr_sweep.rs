//! 200-vehicle platoon at 1% and 2% penetration of each automated kind.
//! Writes the comparison table as CSV and a bar chart.
//!
//!     cargo run --release --example mpr_sweep -- [runs]

use stopgo::config::ExperimentConfig;
use stopgo::ensemble::compare_kinds;
use stopgo::{io, svg};

fn main() -> stopgo::Result<()> {
    let mut cfg = ExperimentConfig::preset("fig4")?;
    cfg.runs = std::env::args().nth(1).map_or(100, |r| r.parse().expect("runs"));
    let table = compare_kinds(&cfg.comparison_specs())?;
    for r in &table.rows {
        println!(
            "{:<5} mpr {:>4.0}%  std #200 {:.3} m/s  reduction {:5.1} %",
            r.kind,
            r.mpr * 100.0,
            r.mean,
            r.reduction_pct
        );
    }
    io::write_file("out/mpr_sweep.csv", |w| io::write_comparison(&table, w))?;
    std::fs::write(
        "out/mpr_sweep.svg",
        svg::comparison_svg(&table, "reduction at vehicle #200"),
    )?;
    Ok(())
}
