#![allow(dead_code)]

use influx::rng::stream_rng;
use influx::{NodeSet, PropagationNetwork};
use rand::Rng;

/// Directed graph where each ordered pair is an edge with probability `p`,
/// rates uniform in `[0.05, 1)`.
pub fn random_net(k: usize, p: f64, seed: u64) -> PropagationNetwork {
    let mut rng = stream_rng(seed, 17);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j && rng.gen::<f64>() < p {
                edges.push((i, j, rng.gen_range(0.05..1.0)));
            }
        }
    }
    PropagationNetwork::from_edges(k, edges).unwrap()
}

/// A directed ring plus random chords, so every node is reachable.
pub fn strongly_connected_net(k: usize, p: f64, seed: u64) -> PropagationNetwork {
    let mut rng = stream_rng(seed, 18);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            if j == (i + 1) % k || rng.gen::<f64>() < p {
                edges.push((i, j, rng.gen_range(0.05..1.0)));
            }
        }
    }
    PropagationNetwork::from_edges(k, edges).unwrap()
}

pub fn mask_set(k: usize, mask: u64) -> NodeSet {
    NodeSet::from_ids(k, (0..k).filter(|i| mask >> i & 1 == 1)).unwrap()
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson(successes: f64, n: f64, z: f64) -> (f64, f64) {
    let p = successes / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (centre - half, centre + half)
}

pub fn linspace(end: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| end * i as f64 / (points - 1) as f64).collect()
}

pub const Z99: f64 = 2.5758293035489004;

/// Counts cells of `empirical` whose Wilson 99% band contains the exact
/// value. Cells where the exact mass is below `UNDEFINED_MASS` are skipped.
pub fn wilson_coverage(
    exact: &[influx::fpe::StateDistribution],
    empirical: &influx::sim::EmpiricalDensity,
) -> (usize, usize) {
    let n = empirical.cascades as f64;
    let mut inside = 0;
    let mut defined = 0;
    for (e, row) in exact.iter().zip(&empirical.rho) {
        for (&p, &phat) in e.rho.iter().zip(row) {
            if p <= influx::oracle::UNDEFINED_MASS {
                continue;
            }
            defined += 1;
            let (lo, hi) = wilson(phat * n, n, Z99);
            if lo <= p && p <= hi {
                inside += 1;
            }
        }
    }
    (inside, defined)
}

/// One-sample Kolmogorov-Smirnov statistic against `Exp(rate)`.
pub fn ks_exponential(samples: &mut [f64], rate: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Solves the lumped equation with the exact rates of `net` and returns the
/// L-infinity distance to the exact lumped density on `points` grid times.
///
/// Rates are sampled every `h / 2`, so every RK4 stage lands on a sample
/// and interpolation adds no error.
pub fn lumping_error(net: &PropagationNetwork, sources: &NodeSet, t_max: f64, points: usize, h: f64) -> f64 {
    use influx::fpe::{initial_state, solve_rk4};
    use influx::oracle::{exact_solution, DEFAULT_NODE_LIMIT};
    let steps = (t_max / h).round() as usize;
    let fine = linspace(t_max, 2 * steps + 1);
    let profile = exact_solution(net, sources, &fine, DEFAULT_NODE_LIMIT)
        .unwrap()
        .rates
        .to_profile()
        .unwrap();
    let grid = linspace(t_max, points);
    let exact = exact_solution(net, sources, &grid, DEFAULT_NODE_LIMIT).unwrap();
    let rho0 = initial_state(net.node_count(), sources.len()).unwrap();
    let fpe = solve_rk4(&profile, &rho0, &grid, h).unwrap();
    exact
        .densities
        .iter()
        .zip(&fpe)
        .flat_map(|(a, b)| a.rho.iter().zip(&b.rho).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
