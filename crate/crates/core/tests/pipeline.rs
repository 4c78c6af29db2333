use netblock::blocking::{bandwidths, check_invariants, partition, BlockPartition};
use netblock::inference::standardized_stat;
use netblock::models::{ModelParams, ZetaLaw};
use netblock::sim::{ModelKind, ModelSpec, StatKind};

const STATS: [StatKind; 5] = [
    StatKind::Degree,
    StatKind::Clustering,
    StatKind::PeerAvg,
    StatKind::PeerShock,
    StatKind::ReducedFormMean,
];

fn specs() -> Vec<ModelSpec> {
    let mut out = Vec::new();
    for stat in STATS {
        out.push(ModelSpec {
            stat,
            ..ModelSpec::neighborhood_degree(1.0).unwrap()
        });
        let utility = ModelParams::new(0.5, -1.5, 3.0, 1.0).unwrap();
        out.push(ModelSpec::new(ModelKind::Utility, utility, stat).unwrap());
        let distance = ModelParams::new(0.0, -2.0, f64::INFINITY, 1.0).unwrap();
        for law in [ZetaLaw::Lattice, ZetaLaw::IidUniform] {
            let mut s = ModelSpec::new(ModelKind::Distance, distance, stat).unwrap();
            s.law = law;
            out.push(s);
        }
    }
    out
}

#[test]
fn every_model_and_statistic_runs_end_to_end() {
    let n = 96;
    let bw = bandwidths(n, 1.0, 1.0, 0.05).unwrap();
    for spec in specs() {
        for padded in [true, false] {
            let real = spec.simulate(5, 0, n, padded).unwrap();
            assert_eq!(real.v.len(), n);
            assert!(real.v.iter().all(|x| x.is_finite()), "{spec:?}");
            let g = real.proximity().unwrap();
            let p: BlockPartition<f64> = partition(&g, bw).unwrap();
            assert!(check_invariants(&g, &p).is_empty(), "{spec:?}");
            let mu = spec.mean(n, 20, 5, padded).unwrap();
            let v = real.with_mean(mu).unwrap();
            match standardized_stat(&v, &p) {
                Ok(r) => assert!(r.ci_low <= r.ci_high && r.t_stat.is_finite()),
                Err(netblock::Error::DegenerateVariance) => {}
                Err(e) => panic!("{spec:?}: {e}"),
            }
        }
    }
}

#[test]
fn padding_only_changes_boundary_nodes() {
    let spec = ModelSpec::neighborhood_degree(1.0).unwrap();
    let padded = spec.analytic_mean(50, true).unwrap().unwrap();
    let raw = spec.analytic_mean(50, false).unwrap().unwrap();
    assert!(padded.iter().all(|m| (m - padded[0]).abs() < 1e-12));
    assert!(raw[0] < padded[0] && (raw[25] - padded[25]).abs() < 1e-12);
}

#[test]
fn replications_are_nested_across_sizes() {
    let spec = ModelSpec::neighborhood_degree(1.0).unwrap();
    let small = spec.simulate(9, 4, 40, false).unwrap();
    let large = spec.simulate(9, 4, 80, false).unwrap();
    // Interior statistics of the shared prefix agree; only node 39 sees new links.
    assert_eq!(small.v[..38], large.v[..38]);
}
