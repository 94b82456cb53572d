//! Exact lumped density and rates of a small network, and the check that
//! the lumped equation driven by those rates reproduces the density.
//!
//! Usage: `cargo run --release --example exact_oracle`

use influx::fpe::{initial_state, solve_rk4};
use influx::gen::{generate, sample_rates, GeneratorSpec};
use influx::oracle::{exact_solution, DEFAULT_NODE_LIMIT};
use influx::NodeSet;

fn main() -> influx::Result<()> {
    let net = sample_rates(&generate(&GeneratorSpec::erdos_renyi(8, 2.5, 5))?, 5, 0.0, 1.0)?;
    let sources = NodeSet::from_ids(8, [0])?;
    let h = 0.01;
    let t_max = 4.0;
    // rates sampled every h/2 so each RK4 stage hits a sample
    let fine: Vec<f64> = (0..=800).map(|i| t_max * i as f64 / 800.0).collect();
    let exact = exact_solution(&net, &sources, &fine, DEFAULT_NODE_LIMIT)?;
    let grid: Vec<f64> = fine.iter().step_by(40).copied().collect();
    let rho0 = initial_state(8, 1)?;
    let lumped = solve_rk4(&exact.rates.to_profile()?, &rho0, &grid, h)?;

    println!("{:>5} {:>10} {:>14}", "t", "sigma", "max |diff|");
    for d in &lumped {
        let i = fine.iter().position(|&t| t == d.time).expect("grid point");
        let want = &exact.densities[i];
        let diff = d.rho.iter().zip(&want.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{:>5.2} {:>10.5} {:>14.3e}", d.time, want.influence(), diff);
    }
    let row = &exact.rates.q[400];
    let shown: Vec<String> = row.iter().map(|q| q.map_or("-".into(), |v| format!("{v:.3}"))).collect();
    println!("exact q_k at t=2: {}", shown.join(" "));
    Ok(())
}
