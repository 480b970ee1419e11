use std::path::PathBuf;

use collapse_core::apparatus::ReservoirPrep;
use collapse_core::experiments::{kick_statistics, KickDistribution, KickStatistics};
use collapse_core::spin::{axis_eigenstate, Axis, Sign};
use serde_json::{json, Value};

fn cauchy_run() -> KickStatistics<f64> {
    let input = axis_eigenstate(&Axis::x(), Sign::Up);
    let d = KickDistribution::Cauchy {
        location: 0.0,
        scale: 0.1,
    };
    kick_statistics(
        &input,
        &Axis::z(),
        d,
        ReservoirPrep::Singlets,
        2,
        10_000,
        1,
        1e-9,
    )
    .unwrap()
}

fn table(s: &KickStatistics<f64>) -> Value {
    json!({
        "distribution": s.distribution,
        "trials": s.trials,
        "counts": s.counts,
        "frequencies": s.frequencies,
        "born": s.born,
        "kick_sum": s.samples.iter().map(|t| t.kick).sum::<f64>(),
        "head": &s.samples[..5],
    })
}

#[test]
fn cauchy_table_matches_golden() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/kick_cauchy.json");
    let first = cauchy_run();
    let second = cauchy_run();
    assert_eq!(first, second, "independent reruns disagree");
    let got = table(&first);
    assert_eq!(first.counts.total(), 10_000);
    assert!((first.frequencies.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&got).unwrap() + "\n").unwrap();
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(got, want);
}
