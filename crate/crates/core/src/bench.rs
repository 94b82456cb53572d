//! Scaling benchmark: rate estimation and RK4 solve time against network size.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fpe::{initial_state, rates_dist, solve_rk4, RateProfile};
use crate::gen::{generate, sample_rates, Family, GeneratorSpec};
use crate::graph::NodeSet;
use crate::rng::stream_rng;

/// What each benchmark size is run on.
#[derive(Clone, Debug, PartialEq)]
pub enum BenchInput {
    /// Random constant rates; times the solve only.
    Profile,
    /// A generated network with rates in `(0, 1)`; also times FPE-dist.
    Network(Family),
}

/// Working set of one RK4 solve over `K + 1` states: the profile, the
/// generator and two state buffers.
pub fn estimated_bytes(node_count: usize) -> usize {
    6 * 8 * (node_count + 1)
}

fn estimated_input_bytes(input: &BenchInput, node_count: usize) -> usize {
    let degree = match input {
        BenchInput::Profile => return estimated_bytes(node_count),
        BenchInput::Network(Family::ErdosRenyi { avg_degree }) => avg_degree.ceil() as usize,
        BenchInput::Network(Family::SmallWorld { ring_degree, .. }) => *ring_degree,
        BenchInput::Network(Family::ScaleFree { attach }) => *attach,
        BenchInput::Network(Family::Kronecker { .. }) => node_count,
    };
    // topology, both adjacency directions and the distance arrays
    estimated_bytes(node_count) + node_count.saturating_mul(degree).saturating_mul(40) + 64 * node_count
}

/// `MemAvailable` from `/proc/meminfo`, when readable.
pub fn available_memory() -> Option<usize> {
    let text = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = text.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: usize = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub nodes: usize,
    pub steps: usize,
    /// Network generation plus FPE-dist, when benchmarking networks.
    pub estimate_seconds: Option<f64>,
    pub solve_seconds: f64,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log(solve seconds) against log(nodes).
    pub slope: Option<f64>,
    /// Why the remaining sizes were skipped.
    pub refused: Option<String>,
}

/// Random rates in `[0.5, 1.5)`.
pub fn random_profile(node_count: usize, seed: u64) -> Result<RateProfile> {
    let mut rng = stream_rng(seed, 0);
    RateProfile::constant((0..node_count).map(|_| rng.gen_range(0.5..1.5)).collect())
}

/// Times `steps` RK4 steps of size `0.05` from `k = 0` for each size,
/// stopping at the first size whose working set exceeds `memory_limit`
/// bytes; the rows measured so far are kept.
pub fn bench_rk4(
    sizes: &[usize],
    input: &BenchInput,
    steps: usize,
    seed: u64,
    memory_limit: Option<usize>,
) -> Result<BenchReport> {
    let h = 0.05;
    let mut rows = Vec::new();
    let mut refused = None;
    for &k in sizes {
        let bytes = estimated_input_bytes(input, k);
        if let Some(limit) = memory_limit {
            if bytes > limit {
                refused = Some(format!(
                    "K={k} needs about {bytes} bytes, more than the {limit} available"
                ));
                break;
            }
        }
        let (rates, estimate_seconds) = match input {
            BenchInput::Profile => (random_profile(k, seed)?, None),
            BenchInput::Network(family) => {
                let start = Instant::now();
                let spec = GeneratorSpec {
                    family: family.clone(),
                    nodes: k,
                    seed,
                };
                let net = sample_rates(&generate(&spec)?, seed, 0.0, 1.0)?;
                let rates = rates_dist(&net, &NodeSet::from_ids(k, [0])?)?;
                (rates, Some(start.elapsed().as_secs_f64()))
            }
        };
        let rho0 = initial_state(k, 0)?;
        let start = Instant::now();
        solve_rk4(&rates, &rho0, &[h * steps as f64], h)?;
        rows.push(BenchRow {
            nodes: k,
            steps,
            estimate_seconds,
            solve_seconds: start.elapsed().as_secs_f64(),
            bytes,
        });
    }
    let slope = loglog_slope(&rows);
    Ok(BenchReport { rows, slope, refused })
}

pub fn loglog_slope(rows: &[BenchRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.solve_seconds > 0.0)
        .map(|r| ((r.nodes as f64).ln(), r.solve_seconds.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<BenchRow> = [10usize, 100, 1000]
            .iter()
            .map(|&k| BenchRow {
                nodes: k,
                steps: 1,
                estimate_seconds: None,
                solve_seconds: 2e-6 * (k as f64).powf(1.5),
                bytes: 0,
            })
            .collect();
        assert!((loglog_slope(&rows).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&rows[..1]), None);
    }

    #[test]
    fn refusal_keeps_partial_table() {
        let limit = Some(estimated_bytes(100));
        let report = bench_rk4(&[10, 100, 1_000_000], &BenchInput::Profile, 2, 1, limit).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.refused.unwrap().contains("K=1000000"));
        let empty = bench_rk4(&[], &BenchInput::Profile, 2, 1, None).unwrap();
        assert!(empty.rows.is_empty() && empty.slope.is_none());
    }

    #[test]
    fn network_rows_time_both_phases() {
        let input = BenchInput::Network(Family::ErdosRenyi { avg_degree: 4.0 });
        let report = bench_rk4(&[50, 100], &input, 5, 3, None).unwrap();
        assert!(report.rows.iter().all(|r| r.estimate_seconds.is_some()));
    }
}
