mod common;

use common::{mask_set, random_net};
use influx::graph::ascending_activation_order;
use influx::{NodeSet, PropagationNetwork};
use proptest::prelude::*;

/// Plain Bellman-Ford over weights `1/alpha`, sources at distance 0.
fn bellman_ford(net: &PropagationNetwork, sources: &NodeSet) -> Vec<f64> {
    let k = net.node_count();
    let mut d = vec![f64::INFINITY; k];
    for s in sources.iter() {
        d[s] = 0.0;
    }
    for _ in 0..k {
        for (i, j, a) in net.edges() {
            if d[i] + 1.0 / a < d[j] {
                d[j] = d[i] + 1.0 / a;
            }
        }
    }
    d
}

fn close(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

#[test]
fn frontier_matches_double_sum_on_fixed_example() {
    let net = random_net(8, 0.4, 99);
    let u = NodeSet::from_ids(8, [0, 1, 2]).unwrap();
    let mut brute = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            if u.contains(i) && !u.contains(j) {
                brute += net.rate(i, j);
            }
        }
    }
    assert!(close(net.frontier_rate(&u).unwrap(), brute));
}

#[test]
fn self_rate_example() {
    let net = PropagationNetwork::from_edges(3, [(0, 1, 1.0)])
        .unwrap()
        .with_self_rates(vec![0.1, 0.2, 0.3])
        .unwrap();
    let u = NodeSet::from_ids(3, [0, 2]).unwrap();
    assert!((net.aggregate_self_rate(&u).unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(net.aggregate_self_rate(&NodeSet::empty(3)).unwrap(), 0.0);
}

#[test]
fn bellman_ford_agrees_on_twelve_nodes() {
    for seed in 0..20 {
        let net = random_net(12, 0.2, seed);
        let s = NodeSet::from_ids(12, [seed as usize % 12]).unwrap();
        let d = net.shortest_activation_distances(&s).unwrap();
        let b = bellman_ford(&net, &s);
        assert!(d.iter().zip(&b).all(|(x, y)| close(*x, *y)), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_is_exact(k in 2usize..14, p in 0.0f64..0.8, seed: u64) {
        let net = random_net(k, p, seed);
        let mut out: Vec<(usize, usize, u64)> = net.edges().map(|(i, j, a)| (i, j, a.to_bits())).collect();
        let mut inn: Vec<(usize, usize, u64)> = (0..k)
            .flat_map(|j| net.in_edges(j).map(move |(i, a)| (i, j, a.to_bits())))
            .collect();
        out.sort_unstable();
        inn.sort_unstable();
        prop_assert_eq!(out, inn);
    }

    #[test]
    fn frontier_partition_identity(k in 2usize..12, p in 0.0f64..0.8, seed: u64, mask: u64) {
        let net = random_net(k, p, seed);
        let u = mask_set(k, mask & ((1 << k) - 1));
        let from_u: f64 = net.edges().filter(|&(i, _, _)| u.contains(i)).map(|e| e.2).sum();
        let internal: f64 = net.edges().filter(|&(i, j, _)| u.contains(i) && u.contains(j)).map(|e| e.2).sum();
        let frontier = net.frontier_rate(&u).unwrap();
        prop_assert!((from_u - (frontier + internal)).abs() < 1e-12 * from_u.max(1.0));
    }

    #[test]
    fn frontier_bound(k in 2usize..12, p in 0.0f64..0.9, seed: u64, mask: u64) {
        let net = random_net(k, p, seed);
        let u = mask_set(k, mask & ((1 << k) - 1));
        let bound = net.max_rate() * u.len() as f64 * net.max_out_degree().min(k - u.len()) as f64;
        prop_assert!(net.frontier_rate(&u).unwrap() <= bound + 1e-12);
    }

    #[test]
    fn aggregates_match_naive_loops(k in 1usize..12, seed: u64, mask: u64) {
        let mut rng = influx::rng::stream_rng(seed, 3);
        use rand::Rng;
        let beta: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let gamma: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let net = PropagationNetwork::from_edges(k, Vec::new()).unwrap()
            .with_self_rates(beta.clone()).unwrap()
            .with_recovery_rates(gamma.clone()).unwrap();
        let u = mask_set(k, mask & ((1 << k) - 1));
        let mut b = 0.0;
        let mut g = 0.0;
        for i in 0..k {
            if u.contains(i) {
                b += beta[i];
                g += gamma[i];
            }
        }
        prop_assert!((net.aggregate_self_rate(&u).unwrap() - b).abs() < 1e-12);
        prop_assert!((net.aggregate_recovery_rate(&u).unwrap() - g).abs() < 1e-12);
    }

    #[test]
    fn dijkstra_relaxation_holds(k in 2usize..30, p in 0.0f64..0.5, seed: u64, src in 0usize..30) {
        let net = random_net(k, p, seed);
        let s = NodeSet::from_ids(k, [src % k]).unwrap();
        let d = net.shortest_activation_distances(&s).unwrap();
        for (i, j, a) in net.edges() {
            prop_assert!(d[j] <= d[i] + 1.0 / a + 1e-12 * d[i].max(1.0));
        }
        prop_assert_eq!(d[src % k], 0.0);
        let b = bellman_ford(&net, &s);
        prop_assert!(d.iter().zip(&b).all(|(x, y)| close(*x, *y)));
    }

    #[test]
    fn order_prefix_minimizes_total_distance(k in 2usize..9, p in 0.1f64..0.7, seed: u64, mask in 1u64..256) {
        let net = random_net(k, p, seed);
        let sources = mask_set(k, (mask & ((1 << k) - 1)).max(1));
        let d = net.shortest_activation_distances(&sources).unwrap();
        let order = ascending_activation_order(&d);
        // sources lead, in id order
        let src_ids = sources.to_vec();
        prop_assert_eq!(&order[..sources.len()], src_ids.as_slice());
        for len in 1..=k {
            let prefix: f64 = order[..len].iter().map(|&i| d[i]).filter(|x| x.is_finite()).sum();
            let prefix_inf = order[..len].iter().filter(|&&i| d[i].is_infinite()).count();
            // brute force: best (fewest infinite, then smallest finite sum) subset of size len
            let mut best = (usize::MAX, f64::INFINITY);
            for m in 0u64..(1 << k) {
                if m.count_ones() as usize != len {
                    continue;
                }
                let ids: Vec<usize> = (0..k).filter(|i| m >> i & 1 == 1).collect();
                let inf = ids.iter().filter(|&&i| d[i].is_infinite()).count();
                let sum: f64 = ids.iter().map(|&i| d[i]).filter(|x| x.is_finite()).sum();
                if inf < best.0 || (inf == best.0 && sum < best.1) {
                    best = (inf, sum);
                }
            }
            prop_assert_eq!(prefix_inf, best.0);
            prop_assert!(prefix <= best.1 + 1e-9 * best.1.max(1.0));
        }
    }
}
