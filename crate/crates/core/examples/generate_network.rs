//! Generates one network of each family and prints its size and degree.
//!
//! Usage: `cargo run --example generate_network [nodes] [seed]`

use influx::gen::{generate, sample_rates, GenerationRecord, GeneratorSpec};
use influx::graph::write_edge_list;

fn main() -> influx::Result<()> {
    let mut args = std::env::args().skip(1);
    let nodes: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1024);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);
    let specs = [
        GeneratorSpec::erdos_renyi(nodes, 8.0, seed),
        GeneratorSpec::small_world(nodes, 6, 0.1, seed),
        GeneratorSpec::scale_free(nodes, 6, seed),
        GeneratorSpec::kronecker(vec![vec![0.9, 0.5], vec![0.5, 0.3]], 10, seed),
    ];
    for spec in &specs {
        let topology = generate(spec)?;
        let net = sample_rates(&topology, seed, 0.0, 1.0)?;
        let record = GenerationRecord::new(spec, 0.0, 1.0, seed, &net);
        println!(
            "{:<60} nodes {:>5}  edges {:>6}  mean out-degree {:.2}",
            serde_json::to_string(&record.spec).unwrap_or_default(),
            net.node_count(),
            net.edge_count(),
            topology.mean_out_degree()
        );
    }
    // the first lines of an edge list as written by `influx generate`
    let net = sample_rates(&generate(&specs[0])?, seed, 0.0, 1.0)?;
    let mut buf = Vec::new();
    write_edge_list(&net, &mut buf, &["example".to_string()])?;
    for line in String::from_utf8_lossy(&buf).lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
