//! Checks FPE-dist and a slightly perturbed exact profile against the
//! rate-error threshold and the influence-error envelope.
//!
//! Usage: `cargo run --release --example verify_bounds [eps]`

use influx::fpe::{rates_dist, RateProfile};
use influx::gen::{generate, sample_rates, GeneratorSpec};
use influx::oracle::{exact_rates, theta, verify_bounds};
use influx::NodeSet;

fn main() -> influx::Result<()> {
    let eps: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.01);
    let net = sample_rates(&generate(&GeneratorSpec::erdos_renyi(6, 2.0, 9))?, 9, 0.0, 1.0)?;
    let sources = NodeSet::from_ids(6, [0])?;
    let grid: Vec<f64> = (0..=300).map(|i| 3.0 * i as f64 / 300.0).collect();

    let report = verify_bounds(&net, &sources, &rates_dist(&net, &sources)?, &grid, eps)?;
    let held = report.rows.iter().filter(|r| r.hypothesis).count();
    println!("FPE-dist: hypothesis holds at {held}/{} times", report.rows.len());

    // exact rates scaled by half the threshold at the horizon
    let exact = exact_rates(&net, &sources, &grid)?.to_profile()?;
    let (mut q, mut r) = (vec![0.0; 6], vec![0.0; 6]);
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&t| {
            exact.rates_at(t, &mut q, &mut r);
            (0..6)
                .map(|k| q[k] * (1.0 + 0.5 * theta(k, 6, 3.0, eps, net.max_rate(), net.max_out_degree())))
                .collect()
        })
        .collect();
    let perturbed = RateProfile::sampled(grid.clone(), rows, None)?;
    let report = verify_bounds(&net, &sources, &perturbed, &grid, eps)?;
    println!("{:>5} {:>12} {:>12} {:>12}", "t", "rate error", "infl. error", "envelope");
    for row in report.rows.iter().step_by(50) {
        println!(
            "{:>5.2} {:>12.3e} {:>12.3e} {:>12.3e}",
            row.time, row.max_rate_error, row.influence_error, row.envelope
        );
    }
    println!("envelope violations: {}", report.violations());
    Ok(())
}
