//! Times the RK4 solver for growing chain sizes and fits the log-log slope.
//!
//! Usage: `cargo run --release --example bench_scaling [max_nodes] [steps]`

use influx::bench::{available_memory, bench_rk4, BenchInput};

fn main() -> influx::Result<()> {
    let mut args = std::env::args().skip(1);
    let max: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1_000_000);
    let steps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let sizes: Vec<usize> = std::iter::successors(Some(1_000usize), |k| Some(k * 10))
        .take_while(|&k| k <= max)
        .collect();
    let report = bench_rk4(&sizes, &BenchInput::Profile, steps, 1, available_memory())?;
    println!("{:>10} {:>6} {:>10}", "nodes", "steps", "seconds");
    for row in &report.rows {
        println!("{:>10} {:>6} {:>10.3}", row.nodes, row.steps, row.solve_seconds);
    }
    if let Some(slope) = report.slope {
        println!("log-log slope: {slope:.3}");
    }
    if let Some(reason) = report.refused {
        println!("stopped: {reason}");
    }
    Ok(())
}
