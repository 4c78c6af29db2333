use netblock::blocking::{bandwidths, check_invariants, partition, Bandwidths, BlockPartition};
use netblock::inference::{eta_hat_sq, standardized_stat};
use netblock::models::AdjacencyMatrix;
use netblock::netstats::{clustering, degree, StatVector};
use netblock::proximity::{LambdaMap, NodeProximity, Proximity, ProximityMatrix};
use proptest::prelude::*;

fn locations(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..100.0, 4..max)
}

fn network(max: usize) -> impl Strategy<Value = (AdjacencyMatrix, Vec<usize>)> {
    (3..max).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), n),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(|(bits, perm)| {
                let out = bits
                    .iter()
                    .enumerate()
                    .map(|(i, row)| (0..row.len()).filter(|&j| j != i && row[j]).collect())
                    .collect();
                (AdjacencyMatrix::from_out_neighbors(out).unwrap(), perm)
            })
    })
}

fn partition_of(z: &[f64], bw: Bandwidths) -> (NodeProximity<f64>, BlockPartition<f64>) {
    let g = NodeProximity::new(z.to_vec(), 0.0, -1.0).unwrap();
    let p = partition(&g, bw).unwrap();
    (g, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_is_disjoint_cover_with_brackets(z in locations(120), cj in 0.4f64..1.5) {
        let n = z.len();
        let bw = bandwidths(n, cj, 1.0, 0.05).unwrap();
        prop_assume!(bw.floor_l() >= 2 && bw.floor_r() >= 1);
        let (g, p) = partition_of(&z, bw);
        let problems = check_invariants(&g, &p);
        prop_assert!(problems.is_empty(), "{:?}", problems);
        let mut seen = vec![0u8; n];
        for b in &p.blocks {
            for &j in b.kept.iter().chain(&b.buffer) {
                seen[j] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn partition_matches_dense_matrix(z in locations(60)) {
        let n = z.len();
        let bw = bandwidths(n, 1.0, 1.0, 0.05).unwrap();
        prop_assume!(bw.floor_r() >= 1);
        let (lazy, p) = partition_of(&z, bw);
        let dense = ProximityMatrix::from_proximity(&lazy).unwrap();
        let q: BlockPartition<f64> = partition(&dense, bw).unwrap();
        prop_assert_eq!(p.j_sets(), q.j_sets());
        prop_assert_eq!(p.t_sets(), q.t_sets());
    }

    #[test]
    fn eta_hat_is_location_invariant(z in locations(80), shift in -50.0f64..50.0, seed in any::<u64>()) {
        let n = z.len();
        let bw = bandwidths(n, 1.0, 1.0, 0.05).unwrap();
        prop_assume!(bw.floor_r() >= 1);
        let (_, p) = partition_of(&z, bw);
        let v: Vec<f64> = (0..n).map(|i| ((seed ^ i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64).collect();
        let base = eta_hat_sq(&StatVector::new(v.clone()).unwrap(), &p).unwrap();
        let moved = eta_hat_sq(&StatVector::new(v.iter().map(|x| x + shift).collect()).unwrap(), &p).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn t_stat_is_scale_equivariant(z in locations(80), scale in 0.01f64..100.0, flip in any::<bool>()) {
        let n = z.len();
        let bw = bandwidths(n, 1.0, 1.0, 0.05).unwrap();
        prop_assume!(bw.floor_r() >= 1);
        let (_, p) = partition_of(&z, bw);
        let v: Vec<f64> = z.iter().map(|x| (x * 1.7).sin()).collect();
        let mu = vec![0.1; n];
        let a = if flip { -scale } else { scale };
        let one = standardized_stat(&StatVector::with_mean(v.clone(), mu.clone()).unwrap(), &p);
        let two = standardized_stat(&StatVector::with_mean(
            v.iter().map(|x| a * x).collect(),
            mu.iter().map(|m| a * m).collect(),
        ).unwrap(), &p);
        if let (Ok(one), Ok(two)) = (one, two) {
            prop_assert!((two.t_stat - a.signum() * one.t_stat).abs() <= 1e-8 * (1.0 + one.t_stat.abs()));
        }
    }

    #[test]
    fn lambda_round_trips(a0 in -3.0f64..3.0, az in -5.0f64..-0.1, k in 0.0f64..8.0) {
        for map in [LambdaMap::normalized(a0, az).unwrap(), LambdaMap::unnormalized(a0, az).unwrap()] {
            let g = map.lambda(k).unwrap();
            prop_assume!(g < map.at_origin());
            prop_assert!((map.inverse(g).unwrap() - k).abs() <= 1e-9);
            prop_assert!((map.inverse_bisect(g).unwrap() - k).abs() <= 1e-9);
        }
    }

    #[test]
    fn degree_and_clustering_are_permutation_equivariant((d, perm) in network(14)) {
        let p = d.permuted(&perm).unwrap();
        let (dv, pv) = (degree::<f64>(&d), degree::<f64>(&p));
        let (dc, pc) = (clustering::<f64>(&d), clustering::<f64>(&p));
        for i in 0..d.len() {
            prop_assert_eq!(dv.values()[i], pv.values()[perm[i]]);
            prop_assert_eq!(dc.values()[i], pc.values()[perm[i]]);
        }
    }

    #[test]
    fn ranked_prefix_is_sorted_and_starts_at_self(z in locations(50), i in 0usize..50, m in 1usize..60) {
        let g = NodeProximity::new(z.clone(), 0.5, -2.0).unwrap();
        let i = i % z.len();
        let pre = g.ranked_prefix(i, m);
        prop_assert_eq!(pre.len(), m.min(z.len()));
        prop_assert_eq!(pre[0].0, i);
        for w in pre.windows(2) {
            prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }
}
