//! FPE-dist influence prediction on a 1024-node network, checked against
//! a Monte Carlo ensemble.
//!
//! Usage: `cargo run --release --example predict_dist`

use influx::compare::compare_curves;
use influx::fpe::{predict, InfluenceCurve, Method, Provenance, Solver};
use influx::gen::{generate, sample_rates, GeneratorSpec};
use influx::sim::ensemble_density;
use influx::NodeSet;

fn main() -> influx::Result<()> {
    let net = sample_rates(&generate(&GeneratorSpec::erdos_renyi(1024, 8.0, 1))?, 1, 0.0, 1.0)?;
    let sources = NodeSet::from_ids(1024, 0..10)?;
    let grid: Vec<f64> = (0..200).map(|i| 2.5 * i as f64 / 199.0).collect();

    let prediction = predict(&net, &sources, &grid, &Method::Dist, Solver::Auto)?;
    let density = ensemble_density(&net, &sources, 2.5, 2000, 1, 0, &grid)?;
    let reference = InfluenceCurve {
        times: grid.clone(),
        sigma: density.influence(),
        provenance: Provenance::monte_carlo(1024, 2000, Some(1)),
    };
    println!("{:>6} {:>10} {:>10}", "t", "fpe-dist", "mc");
    for i in (0..grid.len()).step_by(20) {
        println!("{:>6.3} {:>10.2} {:>10.2}", grid[i], prediction.curve.sigma[i], reference.sigma[i]);
    }
    let cmp = compare_curves(&prediction.curve, &reference)?;
    println!("max relative error {:.4}, mean {:.4}", cmp.max_relative, cmp.mean_relative);
    Ok(())
}
