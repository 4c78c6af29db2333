use netblock::harness::emit::{emit, replications_csv, CSV_HEADER};
use netblock::harness::{ks_statistic, run_clt, run_lln, ExperimentConfig};
use statrs::distribution::{ContinuousCDF, Normal};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_grid: vec![64, 128],
        reps: 5,
        seed: 11,
        ..ExperimentConfig::default()
    }
}

#[test]
fn ks_at_normal_quantiles() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    for r in [10usize, 40] {
        let q: Vec<f64> = (1..=r).map(|i| normal.inverse_cdf((i as f64 - 0.5) / r as f64)).collect();
        let d = ks_statistic(&q).unwrap();
        assert!((d - 0.5 / r as f64).abs() < 1e-6, "{d}");
    }
}

#[test]
fn single_replication_gives_one_csv_row() {
    let cfg = ExperimentConfig { reps: 1, n_grid: vec![64], ..small() };
    let csv = replications_csv(&run_clt(&cfg).unwrap().rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, [CSV_HEADER, lines[1]]);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn summary_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.kappa_u = 1.0;
    cfg.c_j = 0.37;
    let (_, json) = emit(&run_lln(&cfg).unwrap(), dir.path()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(v["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
    assert!(v["checks"].is_object() && v["pass"].is_boolean());
}

#[test]
fn infinite_radius_survives_json() {
    let mut cfg = small();
    cfg.model = netblock::sim::ModelKind::Utility;
    cfg.kappa_u = f64::INFINITY;
    let v = serde_json::to_value(&cfg).unwrap();
    assert_eq!(v["kappa_u"], "inf");
    assert_eq!(serde_json::from_value::<ExperimentConfig>(v).unwrap(), cfg);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = small();
    for d in [a.path(), b.path()] {
        emit(&run_clt(&cfg).unwrap(), d).unwrap();
    }
    for f in ["replications.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_clt(&cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn degenerate_statistic_gives_zero_averages() {
    // Links die under extreme homophily, so degree equals its mean (zero).
    let cfg = ExperimentConfig {
        model: netblock::sim::ModelKind::Utility,
        alpha0: -40.0,
        alpha_zeta: -1.0,
        ..small()
    };
    let s = run_lln(&cfg).unwrap();
    assert!(s.sizes.iter().all(|r| r.median_abs_avg < 1e-12));
}

#[test]
fn emit_reports_path_on_failure() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let blocked = file.path().join("sub");
    let err = emit(&run_lln(&small()).unwrap(), &blocked).unwrap_err();
    assert!(err.to_string().contains("sub"));
}
