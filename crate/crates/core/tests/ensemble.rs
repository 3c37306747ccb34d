use stopgo::config::ExperimentConfig;
use stopgo::ensemble::{compare_kinds, run_ensemble, EnsembleSpec};
use stopgo::model::VehicleKind::{self, *};

fn fig4(runs: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset("fig4").unwrap();
    cfg.runs = runs;
    cfg
}

#[test]
fn independent_seeds_agree_within_error() {
    let mut cfg = ExperimentConfig::preset("fig3b").unwrap();
    cfg.runs = 200;
    let spec = cfg.ensemble_spec(Mav, 0.01);
    let a = run_ensemble(&spec).unwrap();
    let b = run_ensemble(&EnsembleSpec {
        master_seed: 99,
        ..spec
    })
    .unwrap();
    for n in [25, 50, 100] {
        let (ma, ea) = (a.mean[n - 1], a.stderr[n - 1]);
        let (mb, eb) = (b.mean[n - 1], b.stderr[n - 1]);
        let pooled = (ea * ea + eb * eb).sqrt();
        assert!(
            (ma - mb).abs() < 3.0 * pooled,
            "vehicle {n}: {ma} vs {mb} (pooled {pooled})"
        );
    }
}

#[test]
fn fully_connected_reduces_most() {
    let cfg = fig4(100);
    let kinds: [VehicleKind; 3] = [Av, Mav, Fcav];
    let specs: Vec<_> = kinds.iter().map(|&k| cfg.ensemble_spec(k, 0.02)).collect();
    let table = compare_kinds(&specs).unwrap();
    let best = table
        .rows
        .iter()
        .max_by(|a, b| a.reduction_pct.total_cmp(&b.reduction_pct))
        .unwrap();
    assert_eq!(best.kind, Fcav);
}

#[test]
fn plain_automation_is_negligible() {
    let cfg = fig4(100);
    let table = compare_kinds(&[cfg.ensemble_spec(Av, 0.01)]).unwrap();
    let av = table.row(Av, 0.01).unwrap();
    assert!(
        av.reduction_pct.abs() <= 2.0 * av.reduction_stderr,
        "AV reduction {} +/- {}",
        av.reduction_pct,
        av.reduction_stderr
    );
}
