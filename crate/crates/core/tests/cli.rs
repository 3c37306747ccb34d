use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use stopgo::config::ExperimentConfig;
use stopgo::ensemble::{compare_kinds_by, run_ensemble};
use stopgo::io;
use stopgo::model::VehicleKind;

fn stopgo(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stopgo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("STOPGO_OUT_DIR")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn run_fig1_writes_leader_and_followers() {
    let dir = tempfile::tempdir().unwrap();
    let out = stopgo(&["run", "--preset", "fig1", "--seed", "7"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let rows = io::read_trajectory(dir.path().join("fig1-run-trajectory.csv")).unwrap();
    let vehicles: BTreeSet<usize> = rows.iter().map(|r| r.vehicle).collect();
    assert_eq!(vehicles, (0..=100).collect());
    assert!(rows
        .iter()
        .filter(|r| r.vehicle == 0)
        .all(|r| r.kind == io::LEADER_LABEL));

    // golden: the CLI trajectory is the library's run of the same config
    let mut cfg = ExperimentConfig::preset("fig1").unwrap();
    cfg.seed = 7;
    let mut expected = Vec::new();
    io::write_trajectory(&cfg.run_single().unwrap(), &mut expected).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("fig1-run-trajectory.csv")).unwrap(),
        expected
    );

    let (header, speeds) = io::read_speeds(dir.path().join("fig1-run-speeds.csv")).unwrap();
    assert_eq!(header.len(), 1 + 101);
    assert_eq!(speeds.len(), cfg.steps + 1);

    let svg = std::fs::read_to_string(dir.path().join("fig1-run-trajectory.svg")).unwrap();
    let drawn: BTreeSet<&str> = svg
        .split("data-vehicle=\"")
        .skip(1)
        .map(|s| &s[..s.find('"').unwrap()])
        .collect();
    assert_eq!(drawn.len(), 101);
}

#[test]
fn mcs_matches_library_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "mcs", "--preset", "fig4", "--kind", "MAV", "--mpr", "0.02", "--runs", "6", "--steps", "400",
    ];
    let a = stopgo(&args, &dir.path().join("a"));
    let b = stopgo(&args, &dir.path().join("b"));
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    let csv_a = std::fs::read(dir.path().join("a/fig4-mcs-MAV.csv")).unwrap();
    let csv_b = std::fs::read(dir.path().join("b/fig4-mcs-MAV.csv")).unwrap();
    assert_eq!(csv_a, csv_b);

    let mut cfg = ExperimentConfig::preset("fig4").unwrap();
    cfg.runs = 6;
    cfg.steps = 400;
    let curve = run_ensemble(&cfg.ensemble_spec(VehicleKind::Mav, 0.02)).unwrap();
    let mut expected = Vec::new();
    io::write_ensemble(&curve, 1, &mut expected).unwrap();
    assert_eq!(csv_a, expected);

    let (index, _) = io::read_ensemble(dir.path().join("a/fig4-mcs-MAV.csv")).unwrap();
    assert_eq!(index, (1..=200).collect::<Vec<_>>());

    // the sidecar reloads to the same experiment
    let echo = ExperimentConfig::from_path(dir.path().join("a/fig4-mcs-MAV.toml"), None).unwrap();
    assert_eq!(echo.runs, 6);
    assert_eq!(echo.kinds, vec![VehicleKind::Mav]);
    assert!(echo.window.is_some());
}

#[test]
fn single_run_mcs_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["mcs", "--runs", "1", "--seed", "5"];
    assert_eq!(code(&stopgo(&args, &dir.path().join("a"))), 0);
    assert_eq!(code(&stopgo(&args, &dir.path().join("b"))), 0);
    assert_eq!(
        std::fs::read(dir.path().join("a/default-mcs-HV.csv")).unwrap(),
        std::fs::read(dir.path().join("b/default-mcs-HV.csv")).unwrap()
    );
}

#[test]
fn compare_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(
        &config,
        "preset = \"fig6-mpr5\"\n[scenario]\nring_length = 1500.0\nn_vehicles = 50\n[ensemble]\nruns = 4\nsteps = 300\ntail_seconds = 60.0\n",
    )
    .unwrap();
    let out = stopgo(&["compare", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = ExperimentConfig::from_path(&config, None).unwrap();
    let table = compare_kinds_by(&cfg.comparison_specs(), cfg.summary()).unwrap();
    let mut expected = Vec::new();
    io::write_comparison(&table, &mut expected).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("fig6-mpr5-compare.csv")).unwrap(),
        expected
    );

    let plotted = stopgo(
        &["plot", dir.path().join("fig6-mpr5-compare.csv").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&plotted), 0);
    assert!(dir.path().join("fig6-mpr5-compare.svg").exists());
}

#[test]
fn flags_override_config_override_preset() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(
        &config,
        "preset = \"fig4\"\n[ensemble]\nruns = 3\nsteps = 300\nseed = 11\n",
    )
    .unwrap();
    let out = stopgo(
        &[
            "mcs",
            "--config",
            config.to_str().unwrap(),
            "--runs",
            "2",
            "--kind",
            "FCAV",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let echo = ExperimentConfig::from_path(dir.path().join("fig4-mcs-FCAV.toml"), None).unwrap();
    assert_eq!(echo.runs, 2); // flag
    assert_eq!(echo.seed, 11); // config
    assert_eq!(echo.n_vehicles, 200); // preset
    assert_eq!(echo.mprs, vec![0.01]);
}

#[test]
fn plot_renders_every_csv_kind() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&stopgo(&["run", "--preset", "fig5", "--steps", "100"], dir.path())),
        0
    );
    assert_eq!(code(&stopgo(&["mcs", "--runs", "2", "--steps", "200"], dir.path())), 0);
    let inputs = ["fig5-run-trajectory.csv", "fig5-run-speeds.csv", "default-mcs-HV.csv"];
    let mut args = vec!["plot".to_string(), "--ring-length".into(), "2500".into()];
    args.extend(inputs.iter().map(|f| dir.path().join(f).to_string_lossy().into_owned()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = stopgo(&args, &dir.path().join("plots"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let svg = std::fs::read_to_string(dir.path().join("plots/default-mcs-HV.svg")).unwrap();
    let points = svg.split("points=\"").nth(1).unwrap();
    let points = &points[..points.find('"').unwrap()];
    assert_eq!(points.split_whitespace().count(), 100);
    assert!(dir.path().join("plots/fig5-run-trajectory.svg").exists());
    assert!(dir.path().join("plots/fig5-run-speeds.svg").exists());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_stopgo"))
        .args(["run", "--steps", "10"])
        .env("STOPGO_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("default-run-trajectory.csv").exists());
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();

    let out = stopgo(&["run", "--preset", "fig99"], p);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig99"));

    let bad = p.join("bad.toml");
    std::fs::write(&bad, "[model]\nspeed_limit = 3\n").unwrap();
    assert_eq!(code(&stopgo(&["run", "--config", bad.to_str().unwrap()], p)), 4);

    let crash = p.join("crash.toml");
    std::fs::write(
        &crash,
        "[model]\nnoise_amplitude = 3.0\n[scenario]\ngeometry = \"ring\"\nring_length = 200.0\nn_vehicles = 10\n[ensemble]\nkinds = [\"FCV\"]\nmprs = [1.0]\nsteps = 600\n",
    )
    .unwrap();
    let out = stopgo(&["run", "--config", crash.to_str().unwrap()], p);
    assert_eq!(code(&out), 5, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("collision"));

    assert_eq!(code(&stopgo(&["plot", p.join("missing.csv").to_str().unwrap()], p)), 6);
    assert_eq!(code(&stopgo(&["run", "--mpr", "lots"], p)), 2);

    let help = Command::new(env!("CARGO_BIN_EXE_stopgo"))
        .arg("--help")
        .output()
        .unwrap();
    let help = String::from_utf8_lossy(&help.stdout);
    for line in ["3  unknown preset", "4  malformed config", "5  collision", "6  I/O"] {
        assert!(help.contains(line), "{line}");
    }
}
