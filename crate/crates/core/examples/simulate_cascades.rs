//! Runs a cascade ensemble on an ER network and prints the empirical
//! influence, plus the finite-difference rates of one activation count.
//!
//! Usage: `cargo run --release --example simulate_cascades [cascades]`

use influx::gen::{generate, sample_rates, GeneratorSpec};
use influx::sim::{empirical_rates, ensemble_density, run_ensemble};
use influx::NodeSet;

fn main() -> influx::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5000);
    let net = sample_rates(&generate(&GeneratorSpec::erdos_renyi(256, 6.0, 7))?, 7, 0.0, 1.0)?;
    let sources = NodeSet::from_ids(256, 0..5)?;
    let horizon = 3.0;
    let grid: Vec<f64> = (0..=30).map(|i| horizon * i as f64 / 30.0).collect();

    let one = &run_ensemble(&net, &sources, horizon, 1, 7, 1)?[0];
    println!("one cascade: {} events, {} active at the horizon", one.events.len(), one.active_count_at(horizon));

    let density = ensemble_density(&net, &sources, horizon, n, 7, 0, &grid)?;
    let sigma = density.influence();
    println!("{:>6} {:>10}", "t", "sigma");
    for (t, s) in grid.iter().zip(&sigma).step_by(5) {
        println!("{t:>6.2} {s:>10.3}");
    }
    let rates = empirical_rates(&density)?;
    let k = 20;
    let defined: Vec<String> = rates
        .q
        .iter()
        .zip(&rates.times)
        .filter_map(|(row, t)| row[k].map(|q| format!("{t:.1}:{q:.2}")))
        .collect();
    println!("q_{k}(t) where defined: {}", defined.join(" "));
    Ok(())
}
