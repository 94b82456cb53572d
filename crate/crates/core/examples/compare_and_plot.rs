//! Compares FPE-dist, FPE-tree and Monte Carlo curves and writes an SVG.
//!
//! Usage: `cargo run --release --example compare_and_plot [out.svg]`

use influx::compare::compare_curves;
use influx::fpe::{predict, InfluenceCurve, Method, Provenance, Solver, TreeWidth};
use influx::gen::{generate, sample_rates, GeneratorSpec};
use influx::plot::{render_svg, Chart, Series};
use influx::sim::ensemble_density;
use influx::NodeSet;

fn main() -> influx::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "compare.svg".into());
    let net = sample_rates(&generate(&GeneratorSpec::small_world(32, 4, 0.1, 4))?, 4, 0.0, 1.0)?;
    let sources = NodeSet::from_ids(32, [0])?;
    let grid: Vec<f64> = (0..200).map(|i| 5.0 * i as f64 / 199.0).collect();

    let density = ensemble_density(&net, &sources, 5.0, 5000, 4, 0, &grid)?;
    let mc = InfluenceCurve {
        times: grid.clone(),
        sigma: density.influence(),
        provenance: Provenance::monte_carlo(32, 5000, Some(4)),
    };
    let dist = predict(&net, &sources, &grid, &Method::Dist, Solver::Auto)?.curve;
    let tree = predict(&net, &sources, &grid, &Method::Tree(TreeWidth::Constant(256)), Solver::Auto)?.curve;
    for (name, curve) in [("fpe-dist", &dist), ("fpe-tree", &tree)] {
        let cmp = compare_curves(curve, &mc)?;
        println!("{name}: max relative error {:.4}, mean {:.4}", cmp.max_relative, cmp.mean_relative);
    }
    let series = [("mcmc", &mc), ("fpe-dist", &dist), ("fpe-tree", &tree)]
        .into_iter()
        .map(|(label, c)| Series { label: label.into(), x: c.times.clone(), y: c.sigma.clone() })
        .collect();
    let chart = Chart {
        title: "small-world K=32".into(),
        x_label: "t".into(),
        y_label: "sigma".into(),
        series,
        ..Chart::default()
    };
    std::fs::write(&out, render_svg(&chart)?)?;
    println!("wrote {out}");
    Ok(())
}
