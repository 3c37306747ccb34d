//! Drive an experiment from a TOML file, write the ensemble CSV, read it
//! back and plot it: the same path the `stopgo` binary takes.
//!
//!     cargo run --release --example config_file -- [config.toml]

use stopgo::config::ExperimentConfig;
use stopgo::ensemble::run_ensemble;
use stopgo::{io, svg};

const SAMPLE: &str = r#"
preset = "fig4"

[model]
noise_model = "speed_per_update"

[scenario]
n_vehicles = 120

[ensemble]
kinds = ["MAV"]
mprs = [0.025]
runs = 40
window = [300.0, 1800.0]
"#;

fn main() -> stopgo::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::from_path(path, None)?,
        None => ExperimentConfig::from_toml(SAMPLE, None)?,
    };
    print!("resolved experiment:\n{}", cfg.to_toml());

    let curve = run_ensemble(&cfg.primary_spec())?;
    let path = std::path::Path::new("out/config_file.csv");
    io::write_file(path, |w| io::write_ensemble(&curve, 1, w))?;
    let (index, back) = io::read_ensemble(path)?;
    let series = svg::Series {
        label: cfg.kinds[0].to_string(),
        points: index.iter().map(|&i| i as f64).zip(back.mean).collect(),
    };
    std::fs::write(
        "out/config_file.svg",
        svg::curves_svg(&[series], &cfg.name, "vehicle", "speed std (m/s)"),
    )?;
    println!("last vehicle: {:.3} m/s", curve.mean[curve.len() - 1]);
    Ok(())
}
