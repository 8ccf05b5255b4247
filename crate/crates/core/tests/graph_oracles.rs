//! Graph construction checked against brute-force oracles on random graphs.

use std::collections::VecDeque;

use glt_core::data::{RoadNetworkSpec, SpeedSeries};
use glt_core::graph::{
    complete_distances, free_flow_reachable, glt_similarity, k_hop_similarity, long_term_similarity, temporal_difference,
    daily_profiles, ultimate_similarity, FreeFlowParams, TemporalDifference,
};
use ndarray::Array2;
use proptest::prelude::*;

fn bfs(adj: &Array2<u8>, src: usize) -> Vec<usize> {
    let n = adj.nrows();
    let mut dist = vec![usize::MAX; n];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if adj[[u, v]] == 1 && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn symmetric_graph() -> impl Strategy<Value = Array2<u8>> {
    (2usize..=12).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.25), n * (n - 1) / 2).prop_map(move |bits| {
            let mut adj = Array2::<u8>::zeros((n, n));
            let mut it = bits.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let b = it.next().unwrap() as u8;
                    adj[[i, j]] = b;
                    adj[[j, i]] = b;
                }
            }
            adj
        })
    })
}

fn brute_top_gamma(q: &Array2<f64>, gamma: usize) -> Array2<u8> {
    let n = q.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| q[[i, a]].total_cmp(&q[[i, b]]).then(a.cmp(&b)));
        for &j in &others[..gamma] {
            out[[i, j]] = 1;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_hop_matches_bfs(adj in symmetric_graph()) {
        let n = adj.nrows();
        for k in 1..=3 {
            let mask = k_hop_similarity(&adj, k).unwrap();
            for i in 0..n {
                let d = bfs(&adj, i);
                for (j, &dj) in d.iter().enumerate() {
                    prop_assert_eq!(mask.values()[[i, j]], (dj <= k) as u8);
                }
            }
        }
    }

    #[test]
    fn top_gamma_matches_sorting(
        n in 3usize..10,
        gamma_seed in 0usize..100,
        raw in proptest::collection::vec(0u8..6, 100),
    ) {
        // Small integer distances force plenty of ties.
        let mut q = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let v = raw[i * 10 + j] as f64;
                q[[i, j]] = v;
                q[[j, i]] = v;
            }
        }
        let gamma = 1 + gamma_seed % (n - 1);
        let masks = long_term_similarity(&TemporalDifference::from_matrix(q.clone(), 96).unwrap(), gamma).unwrap();
        let expected = brute_top_gamma(&q, gamma);
        prop_assert_eq!(masks.row_wise.values(), &expected);
        for i in 0..n {
            for j in 0..n {
                let or = expected[[i, j]].max(expected[[j, i]]);
                prop_assert_eq!(masks.symmetric.values()[[i, j]], or);
            }
        }
    }

    #[test]
    fn ultimate_support_is_intersection(adj in symmetric_graph(), gamma_seed in 0usize..50, reach in 1.0f64..6.0) {
        let n = adj.nrows();
        let gamma = 1 + gamma_seed % (n - 1);
        let q = Array2::from_shape_fn((n, n), |(i, j)| (i as f64 - j as f64).abs() * ((i + j) % 3 + 1) as f64);
        let lt = long_term_similarity(&TemporalDifference::from_matrix(q, 96).unwrap(), gamma).unwrap();
        let distance = Array2::from_shape_fn((n, n), |(i, j)| if adj[[i, j]] == 1 { 1.0 } else { 0.0 });
        let network = RoadNetworkSpec::new(adj.clone(), distance).unwrap();
        let params = FreeFlowParams { free_flow_mph: reach * 3.0, delta_t_minutes: 20.0, intervals: 1 };
        let sf = free_flow_reachable(&complete_distances(&network), &params).unwrap();
        for k in 1..=3 {
            let glt = glt_similarity(&k_hop_similarity(&adj, k).unwrap(), &lt.symmetric).unwrap();
            let su = ultimate_similarity(&glt, &sf).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let both = glt.values()[[i, j]] != 0 && sf.values()[[i, j]] != 0;
                    prop_assert_eq!(su.values()[[i, j]], both as u8);
                }
            }
        }
    }

    #[test]
    fn difference_is_a_metric(raw in proptest::collection::vec(0.0f64..70.0, 4 * 288)) {
        let values = Array2::from_shape_vec((288, 4), raw).unwrap();
        let series = SpeedSeries::new(values, 5, 0).unwrap();
        let q = temporal_difference(&daily_profiles(&series).unwrap());
        let q = q.values();
        for i in 0..4 {
            prop_assert_eq!(q[[i, i]], 0.0);
            for j in 0..4 {
                prop_assert_eq!(q[[i, j]], q[[j, i]]);
                for m in 0..4 {
                    prop_assert!(q[[i, j]] <= q[[i, m]] + q[[m, j]] + 1e-9);
                }
            }
        }
    }
}

#[test]
fn completed_distances_are_shortest_paths() {
    // Weighted 5-cycle with a long 0-4 edge. Unknown pairs take the shortest
    // path; the given 0-4 length is kept.
    let n = 5;
    let mut adj = Array2::<u8>::zeros((n, n));
    let mut dist = Array2::<f64>::zeros((n, n));
    for (a, b, d) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5), (3, 4, 0.5), (0, 4, 10.0)] {
        adj[[a, b]] = 1;
        adj[[b, a]] = 1;
        dist[[a, b]] = d;
        dist[[b, a]] = d;
    }
    let full = complete_distances(&RoadNetworkSpec::new(adj, dist).unwrap());
    assert_eq!(full[[0, 4]], 10.0);
    assert_eq!(full[[0, 3]], 4.5);
    assert_eq!(full[[1, 3]], 3.5);
    assert_eq!(full[[4, 1]], 4.0);
}

#[test]
fn free_flow_grows_with_intervals() {
    let d = Array2::from_shape_fn((6, 6), |(i, j)| 10.0 * (i as f64 - j as f64).abs());
    let mut prev = 0;
    for m in 1..=4 {
        let params = FreeFlowParams { intervals: m, ..FreeFlowParams::default() };
        let count = free_flow_reachable(&d, &params).unwrap().nonzero_count();
        assert!(count >= prev);
        prev = count;
    }
    assert_eq!(prev, 36);
}
