mod common;

use common::{linspace, lumping_error, mask_set, random_net, strongly_connected_net};
use influx::fpe::RateProfile;
use influx::oracle::{
    envelope, envelope_factor, exact_density, exact_rates, exact_solution, theta, verify_bounds, FullStateChain,
    DEFAULT_NODE_LIMIT,
};
use influx::{Error, NodeSet, PropagationNetwork};

#[test]
fn lone_self_activating_node() {
    let b = 0.4;
    let net = PropagationNetwork::from_edges(1, Vec::new())
        .unwrap()
        .with_self_rates(vec![b])
        .unwrap();
    let d = exact_density(&net, &NodeSet::empty(1), &linspace(5.0, 11)).unwrap();
    for s in &d {
        assert!((s.rho[1] - (1.0 - (-b * s.time).exp())).abs() < 1e-11);
    }
}

#[test]
fn two_node_edge() {
    let net = PropagationNetwork::from_edges(2, [(0, 1, 1.3)]).unwrap();
    let s = NodeSet::from_ids(2, [0]).unwrap();
    for d in exact_density(&net, &s, &linspace(3.0, 7)).unwrap() {
        assert!((d.rho[2] - (1.0 - (-1.3 * d.time).exp())).abs() < 1e-11);
    }
}

/// Full distribution by brute force: propagate the chain and lump by hand.
#[test]
fn lumped_density_sums_over_subsets() {
    let net = random_net(7, 0.4, 13);
    let chain = FullStateChain::new(&net, DEFAULT_NODE_LIMIT).unwrap();
    assert_eq!(chain.state_count(), 128);
    let s = NodeSet::from_ids(7, [1, 4]).unwrap();
    let mut p = chain.point_mass(&s).unwrap();
    chain.propagate(&mut p, 1.5).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-11);
    let mut by_size = vec![0.0; 8];
    for mask in 0u64..128 {
        by_size[mask.count_ones() as usize] += p[mask as usize];
    }
    let d = exact_density(&net, &s, &[1.5]).unwrap();
    for k in 0..=7 {
        assert!((d[0].rho[k] - by_size[k]).abs() < 1e-15);
    }
}

/// Exact rates recomputed from the full distribution, and checked against
/// the range of `alpha(U) + beta(U^c)` over each size class.
#[test]
fn exact_rates_are_convex_combinations() {
    let k = 7;
    let net = random_net(k, 0.4, 14).with_self_rates(vec![0.02; k]).unwrap();
    let s = NodeSet::from_ids(k, [0]).unwrap();
    let chain = FullStateChain::new(&net, DEFAULT_NODE_LIMIT).unwrap();
    let grid = linspace(4.0, 9);
    let rates = exact_rates(&net, &s, &grid).unwrap();
    let exit = |mask: u64| {
        let u = mask_set(k, mask);
        let mut out = NodeSet::full(k);
        for i in u.iter() {
            out.remove(i);
        }
        net.frontier_rate(&u).unwrap() + net.aggregate_self_rate(&out).unwrap()
    };
    let mut lo = vec![f64::INFINITY; k + 1];
    let mut hi = vec![f64::NEG_INFINITY; k + 1];
    for mask in 0u64..1 << k {
        let c = mask.count_ones() as usize;
        lo[c] = lo[c].min(exit(mask));
        hi[c] = hi[c].max(exit(mask));
    }
    let mut p = chain.point_mass(&s).unwrap();
    let mut t = 0.0;
    for (m, &target) in grid.iter().enumerate() {
        chain.propagate(&mut p, target - t).unwrap();
        t = target;
        for c in 0..k {
            let mass: f64 = (0u64..1 << k).filter(|u| u.count_ones() as usize == c).map(|u| p[u as usize]).sum();
            let Some(q) = rates.q[m][c] else {
                assert!(mass <= 1e-12);
                continue;
            };
            let raw: f64 = (0u64..1 << k)
                .filter(|u| u.count_ones() as usize == c)
                .map(|u| p[u as usize] * exit(u))
                .sum::<f64>()
                / mass;
            assert!(raw >= lo[c] - 1e-9 && raw <= hi[c] + 1e-9, "t {target} k {c}");
            assert!((q - raw).abs() <= 1e-9 * raw.max(1.0));
        }
    }
}

#[test]
fn initial_rate_is_source_exit_rate() {
    let net = random_net(6, 0.5, 2).with_self_rates(vec![0.1; 6]).unwrap();
    let s = NodeSet::from_ids(6, [0, 5]).unwrap();
    let rates = exact_rates(&net, &s, &[0.0]).unwrap();
    let rest = NodeSet::from_ids(6, [1, 2, 3, 4]).unwrap();
    let want = net.frontier_rate(&s).unwrap() + net.aggregate_self_rate(&rest).unwrap();
    assert!((rates.q[0][2].unwrap() - want).abs() < 1e-14);
    assert!(rates.q[0].iter().enumerate().all(|(k, q)| k == 2 || q.is_none()));
}

#[test]
fn path_rates_are_constant_where_defined() {
    let net = PropagationNetwork::from_edges(4, [(0, 1, 0.6), (1, 2, 0.9), (2, 3, 0.3)]).unwrap();
    let s = NodeSet::from_ids(4, [0]).unwrap();
    let rates = exact_rates(&net, &s, &linspace(5.0, 21)).unwrap();
    let want = [0.0, 0.6, 0.9, 0.3];
    for row in &rates.q {
        for (k, q) in row.iter().enumerate() {
            if let Some(q) = q {
                assert!((q - want[k]).abs() < 1e-12, "k {k}: {q}");
            }
        }
    }
}

#[test]
fn exact_rates_reproduce_lumped_density() {
    for seed in 0..3 {
        let net = random_net(6, 0.4, 100 + seed);
        let s = NodeSet::from_ids(6, [0]).unwrap();
        let err = lumping_error(&net, &s, 5.0, 50, 0.01);
        assert!(err < 1e-6, "seed {seed}: {err}");
    }
}

#[test]
fn exact_solution_conserves_mass_with_recovery() {
    let net = strongly_connected_net(6, 0.3, 7)
        .with_recovery_rates(vec![0.5; 6])
        .unwrap();
    let s = NodeSet::from_ids(6, [2]).unwrap();
    let sol = exact_solution(&net, &s, &linspace(5.0, 11), DEFAULT_NODE_LIMIT).unwrap();
    assert!(sol.rates.r.is_some());
    for d in &sol.densities {
        assert!((d.rho.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn refuses_over_the_limit() {
    let net = random_net(12, 0.2, 1);
    assert!(matches!(FullStateChain::new(&net, 10), Err(Error::Resource(_))));
}

#[test]
fn threshold_and_envelope_formulas() {
    // theta = min(log(1 + eps/2) / (amax k t min(d, K-k)), eps / (2 + eps))
    let th = theta(2, 6, 1.5, 0.01, 0.8, 3);
    let want = ((1.005f64).ln() / (0.8 * 2.0 * 1.5 * 3.0)).min(0.01 / 2.01);
    assert!((th - want).abs() < 1e-16);
    assert_eq!(theta(0, 6, 1.5, 0.01, 0.8, 3), 0.01 / 2.01);
    // c_K(t) by direct summation with explicit factorials
    let (k, q, t) = (5usize, 0.7f64, 2.0f64);
    let mut fact = 1.0;
    let mut direct = 0.0;
    for j in 0..k {
        if j > 0 {
            fact *= j as f64;
        }
        direct += (k - j) as f64 / fact * (q * t).powi(j as i32);
    }
    assert!((envelope_factor(k, q, t) - direct / k as f64).abs() < 1e-13);
    assert_eq!(envelope_factor(k, q, 0.0), 1.0);
    let e = envelope(6, 0.01, 1.0, 0.0, 0.0);
    assert!((e - (1.01f64.powi(6) - 1.0)).abs() < 1e-15);
    assert!(envelope(6, 0.01, 0.1, 2.0, 10.0) < e);
}

#[test]
fn exact_estimate_has_no_error() {
    let net = random_net(6, 0.5, 9);
    let s = NodeSet::from_ids(6, [0]).unwrap();
    let grid = linspace(3.0, 601);
    let profile = exact_rates(&net, &s, &grid).unwrap().to_profile().unwrap();
    let report = verify_bounds(&net, &s, &profile, &grid, 0.01).unwrap();
    for row in &report.rows {
        assert!(row.max_rate_error < 1e-12);
        assert!(row.hypothesis);
        assert!(row.influence_error < 1e-6);
    }
    assert_eq!(report.violations(), 0);
}

#[test]
fn oversized_errors_fail_the_hypothesis() {
    let net = strongly_connected_net(6, 0.4, 10);
    let s = NodeSet::from_ids(6, [0]).unwrap();
    let grid = linspace(2.0, 21);
    let exact = exact_rates(&net, &s, &[0.0, 50.0]).unwrap();
    // q0 at t = 0 is known exactly; scale the rest well beyond theta
    let mut q: Vec<f64> = (0..6).map(|k| exact.q[0][k].or(exact.q[1][k]).unwrap_or(1.0)).collect();
    for v in &mut q {
        *v *= 1.2;
    }
    let report = verify_bounds(&net, &s, &RateProfile::constant(q).unwrap(), &grid, 0.01).unwrap();
    assert!(report.rows.iter().all(|r| !r.hypothesis));
    assert_eq!(report.violations(), 0);
}

#[test]
fn recovery_is_out_of_scope_for_bounds() {
    let net = random_net(4, 0.5, 1).with_recovery_rates(vec![0.1; 4]).unwrap();
    let s = NodeSet::from_ids(4, [0]).unwrap();
    let profile = RateProfile::constant(vec![1.0; 4]).unwrap();
    assert!(matches!(
        verify_bounds(&net, &s, &profile, &[0.0, 1.0], 0.01),
        Err(Error::Unsupported(_))
    ));
}
