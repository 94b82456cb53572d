//! FPE-tree against FPE-dist and the exact solution on a 16-node network,
//! with the per-layer retained mass of the tree search.
//!
//! Usage: `cargo run --release --example predict_tree [width]`

use influx::compare::compare_curves;
use influx::fpe::{predict, Method, Solver, TreeWidth};
use influx::gen::{generate, sample_rates, GeneratorSpec};
use influx::oracle::{exact_solution, DEFAULT_NODE_LIMIT};
use influx::NodeSet;

fn main() -> influx::Result<()> {
    let width: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(256);
    let net = sample_rates(&generate(&GeneratorSpec::erdos_renyi(16, 4.0, 3))?, 3, 0.0, 1.0)?;
    let sources = NodeSet::from_ids(16, [0])?;
    let grid: Vec<f64> = (0..100).map(|i| 5.0 * i as f64 / 99.0).collect();

    let exact = exact_solution(&net, &sources, &grid, DEFAULT_NODE_LIMIT)?.influence();
    let tree = predict(&net, &sources, &grid, &Method::Tree(TreeWidth::Constant(width)), Solver::Auto)?;
    let dist = predict(&net, &sources, &grid, &Method::Dist, Solver::Auto)?;
    println!("FPE-tree (m={width}) max relative error {:.4}", compare_curves(&tree.curve, &exact)?.max_relative);
    println!("FPE-dist          max relative error {:.4}", compare_curves(&dist.curve, &exact)?.max_relative);
    println!("{:>5} {:>10} {:>6} {:>14}", "size", "generated", "kept", "retained mass");
    for layer in tree.tree_layers.iter().flatten() {
        println!("{:>5} {:>10} {:>6} {:>14.6}", layer.size, layer.candidates, layer.kept, layer.retained_mass);
    }
    Ok(())
}
