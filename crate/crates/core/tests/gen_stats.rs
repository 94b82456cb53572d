use influx::gen::{generate, kronecker_probability, sample_rates, GeneratorSpec};
use influx::graph::write_edge_list;

#[test]
fn kronecker_edge_frequencies_match_power_matrix() {
    let seed = vec![vec![0.9, 0.5], vec![0.5, 0.3]];
    let runs = 10_000;
    let mut hits = vec![vec![0u32; 8]; 8];
    for s in 0..runs {
        let topo = generate(&GeneratorSpec::kronecker(seed.clone(), 3, s)).unwrap();
        assert_eq!(topo.node_count, 8);
        for &(i, j) in &topo.edges {
            hits[i as usize][j as usize] += 1;
        }
    }
    // oracle: explicit three-fold Kronecker product
    let mut power = seed.clone();
    for _ in 1..3 {
        let n = power.len();
        let mut next = vec![vec![0.0; n * 2]; n * 2];
        for a in 0..n {
            for b in 0..n {
                for c in 0..2 {
                    for d in 0..2 {
                        next[a * 2 + c][b * 2 + d] = power[a][b] * seed[c][d];
                    }
                }
            }
        }
        power = next;
    }
    for i in 0..8 {
        for j in 0..8 {
            if i == j {
                assert_eq!(hits[i][j], 0);
                continue;
            }
            let p = power[i][j];
            // every factor is the same matrix, so digit order does not matter
            assert!((kronecker_probability(&seed, 3, i, j) - p).abs() < 1e-15);
            let freq = hits[i][j] as f64 / runs as f64;
            let sd = (p * (1.0 - p) / runs as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * sd, "({i},{j}): {freq} vs {p}");
        }
    }
}

#[test]
fn identical_spec_serializes_identically() {
    let spec = GeneratorSpec::scale_free(200, 3, 5);
    let write = || {
        let net = sample_rates(&generate(&spec).unwrap(), 5, 0.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&net, &mut buf, &[]).unwrap();
        buf
    };
    assert_eq!(write(), write());
}

#[test]
fn degenerate_rate_band_pins_rates_near_top() {
    let topo = generate(&GeneratorSpec::erdos_renyi(50, 4.0, 1)).unwrap();
    let net = sample_rates(&topo, 1, 1.0 - 1e-9, 1.0).unwrap();
    assert!(net.edges().all(|(_, _, a)| a > 1.0 - 1e-9 && a < 1.0));
}

#[test]
fn rate_mean_over_many_edges() {
    let topo = generate(&GeneratorSpec::erdos_renyi(10_000, 10.0, 8)).unwrap();
    assert!(topo.edges.len() > 90_000);
    let net = sample_rates(&topo, 8, 0.0, 1.0).unwrap();
    let mean = net.edges().map(|e| e.2).sum::<f64>() / net.edge_count() as f64;
    assert!((mean - 0.5).abs() < 0.01, "{mean}");
    assert!(net.edges().all(|(_, _, a)| a > 0.0 && a < 1.0));
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(generate(&GeneratorSpec::erdos_renyi(16, 16.0, 0)).is_err());
    assert!(generate(&GeneratorSpec::kronecker(vec![vec![1.2]], 2, 0)).is_err());
    assert!(generate(&GeneratorSpec::small_world(10, 4, 1.5, 0)).is_err());
    let topo = generate(&GeneratorSpec::erdos_renyi(8, 2.0, 0)).unwrap();
    assert!(sample_rates(&topo, 0, -0.1, 1.0).is_err());
    assert!(sample_rates(&topo, 0, 1.0, 1.0).is_err());
}
