//! Command-line front end; every subcommand writes a run manifest next to
//! its primary output.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use influx::bench::{available_memory, bench_rk4, BenchInput};
use influx::compare::compare_curves;
use influx::fpe::{
    predict, read_curve, read_rate_profile, write_curve, write_rate_profile, write_rate_series, Method, Solver,
    TreeWidth,
};
use influx::gen::{generate, sample_rates, Family, GenerationRecord, GeneratorSpec};
use influx::graph::{read_network, write_edge_list, write_node_attributes};
use influx::manifest::{FileDigest, PhaseTiming, RunManifest};
use influx::oracle::{exact_solution, verify_bounds};
use influx::plot::{render_svg, Chart, Series};
use influx::sim::{empirical_density, empirical_rates, ensemble_density, run_ensemble, write_cascades, write_density_csv};
use influx::textio::fmt_num;
use influx::{Error, NodeSet, PropagationNetwork, Result};

#[derive(Parser, Debug)]
#[command(name = "influx", version, about = "Influence prediction on continuous-time propagation networks")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for ensembles and solvers (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Directory for outputs given as relative paths.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random network with uniform edge rates.
    Generate(GenerateArgs),
    /// Simulate a cascade ensemble and write empirical densities.
    Simulate(SimulateArgs),
    /// Predict the influence curve with FPE-dist or FPE-tree.
    Predict(PredictArgs),
    /// Solve the exact full-state chain of a small network.
    Oracle(OracleArgs),
    /// Check an estimated rate profile against the error bound.
    VerifyBounds(VerifyArgs),
    /// Relative error of one influence curve against a reference.
    Compare(CompareArgs),
    /// Time rate estimation and RK4 solves for growing sizes.
    Bench(BenchArgs),
    /// Draw influence curves as an SVG chart.
    Plot(PlotArgs),
    /// Repeat the run recorded in a manifest and check its outputs.
    Rerun(RerunArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FamilyArg {
    Er,
    SmallWorld,
    ScaleFree,
    Kronecker,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Node count (implied by the seed matrix for Kronecker graphs).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    /// Small-world ring degree (even); defaults to the rounded average degree.
    #[arg(long)]
    ring_degree: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    rewire_prob: f64,
    /// Scale-free edges per arriving node; defaults to the rounded average degree.
    #[arg(long)]
    attach: Option<usize>,
    /// Kronecker seed matrix, rows separated by `;`, e.g. `0.9,0.5;0.5,0.3`.
    #[arg(long)]
    kronecker_seed: Option<String>,
    #[arg(long, default_value_t = 1)]
    power: u32,
    #[arg(long, default_value_t = 0.0)]
    rate_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    rate_hi: f64,
    /// Self-activation rate given to every node (writes an attribute file).
    #[arg(long)]
    self_rate: Option<f64>,
    /// Recovery rate given to every node (writes an attribute file).
    #[arg(long)]
    recovery_rate: Option<f64>,
    #[arg(long, default_value = "net.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct NetArgs {
    /// Edge list `src,dst,rate`.
    #[arg(long)]
    net: PathBuf,
    /// Node attributes `node,beta,gamma`.
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Comma-separated source node ids (empty for none).
    #[arg(long, default_value = "")]
    sources: String,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 200)]
    t_points: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 5000)]
    cascades: usize,
    /// Empirical density `t,rho_0,...,rho_K`.
    #[arg(long, default_value = "density.csv")]
    out: PathBuf,
    #[arg(long)]
    emit_curve: Option<PathBuf>,
    #[arg(long)]
    emit_rates: Option<PathBuf>,
    #[arg(long)]
    emit_cascades: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Dist,
    Tree,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SolverArg {
    Auto,
    Rk4,
    Expm,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "dist")]
    method: MethodArg,
    /// Candidate sets kept per layer; a comma list gives a per-layer schedule.
    #[arg(long, default_value = "64")]
    tree_width: String,
    #[arg(long, value_enum, default_value = "auto")]
    solver: SolverArg,
    /// RK4 step (default keeps h * max rate at 0.1).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value = "curve.csv")]
    out: PathBuf,
    #[arg(long)]
    emit_density: Option<PathBuf>,
    #[arg(long)]
    emit_rates: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = influx::oracle::DEFAULT_NODE_LIMIT)]
    node_limit: usize,
    /// Exact influence curve.
    #[arg(long, default_value = "exact_curve.csv")]
    out: PathBuf,
    #[arg(long, num_args = 0..=1, default_missing_value = "exact_density.csv")]
    emit_density: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "exact_rates.csv")]
    emit_rates: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Estimated rate profile; when absent the rates come from `--method`.
    #[arg(long)]
    rates: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dist")]
    method: MethodArg,
    #[arg(long, default_value = "64")]
    tree_width: String,
    #[arg(long, default_value = "bounds.json")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    predicted: PathBuf,
    reference: PathBuf,
    #[arg(long, default_value = "compare.json")]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BenchInputArg {
    Profile,
    Er,
    SmallWorld,
    ScaleFree,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated node counts; empty for an empty table.
    #[arg(long, default_value = "10000,100000,1000000")]
    sizes: String,
    #[arg(long, value_enum, default_value = "profile")]
    input: BenchInputArg,
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Curve files; each becomes a series named after its file stem.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long)]
    log_y: bool,
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RerunArgs {
    manifest: PathBuf,
    /// Skip comparing output digests.
    #[arg(long)]
    no_check: bool,
}

/// Collects inputs, outputs and timings for the manifest.
struct Run {
    out_dir: PathBuf,
    manifest: RunManifest,
    outputs: Vec<PathBuf>,
    clock: Instant,
    phase_clock: Instant,
}

impl Run {
    fn new(cli: &Cli, subcommand: &str, argv: Vec<String>, seeded: bool) -> Result<Self> {
        fs::create_dir_all(&cli.out_dir)?;
        Ok(Run {
            out_dir: cli.out_dir.clone(),
            manifest: RunManifest::new(subcommand, argv, seeded.then_some(cli.seed), Some(cli.workers)),
            outputs: Vec::new(),
            clock: Instant::now(),
            phase_clock: Instant::now(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    fn output(&mut self, path: &Path) -> PathBuf {
        let path = if path.is_absolute() { path.to_path_buf() } else { self.out_dir.join(path) };
        self.outputs.push(path.clone());
        path
    }

    fn phase(&mut self, name: &str) {
        self.manifest.phases.push(PhaseTiming {
            phase: name.to_string(),
            seconds: self.phase_clock.elapsed().as_secs_f64(),
        });
        self.phase_clock = Instant::now();
    }

    fn manifest_path(&self) -> PathBuf {
        let primary = self.outputs.first().cloned().unwrap_or_else(|| self.out_dir.join("run"));
        let mut name = primary.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        primary.with_file_name(name)
    }

    /// Comment line tying an output file to this run's manifest.
    fn tag(&self) -> String {
        let path = self.manifest_path();
        format!("manifest={}", path.file_name().unwrap_or_default().to_string_lossy())
    }

    fn finish(mut self) -> Result<()> {
        for out in &self.outputs {
            self.manifest.outputs.push(FileDigest::of(out)?);
        }
        self.manifest.wall_seconds = self.clock.elapsed().as_secs_f64();
        let path = self.manifest_path();
        self.manifest.write(&path)?;
        eprintln!("manifest: {}", path.display());
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn parse_sources(text: &str, node_count: usize) -> Result<NodeSet> {
    let ids = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::Spec(format!("bad source id {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    NodeSet::from_ids(node_count, ids)
}

fn parse_width(text: &str) -> Result<TreeWidth> {
    let widths = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Spec(format!("bad tree width {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(match widths.as_slice() {
        [m] => TreeWidth::Constant(*m),
        _ => TreeWidth::PerLayer(widths),
    })
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Spec(format!("bad matrix entry {v:?}"))))
                .collect()
        })
        .collect()
}

fn grid(args: &GridArgs) -> Result<Vec<f64>> {
    if !(args.t_max.is_finite() && args.t_max > 0.0) || args.t_points < 2 {
        return Err(Error::Spec("need t-max > 0 and at least two time points".into()));
    }
    let n = args.t_points - 1;
    Ok((0..=n).map(|i| args.t_max * i as f64 / n as f64).collect())
}

fn load(run: &mut Run, args: &NetArgs) -> Result<(PropagationNetwork, NodeSet)> {
    run.input(&args.net)?;
    if let Some(a) = &args.attrs {
        run.input(a)?;
    }
    let net = read_network(&args.net, args.attrs.as_deref())?;
    let sources = parse_sources(&args.sources, net.node_count())?;
    Ok((net, sources))
}

fn method(kind: MethodArg, width: &str) -> Result<Method> {
    Ok(match kind {
        MethodArg::Dist => Method::Dist,
        MethodArg::Tree => Method::Tree(parse_width(width)?),
    })
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    manifest: String,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(run: &Run, path: &Path, body: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &Tagged { manifest: run.tag(), body })?;
    writeln!(w)?;
    Ok(())
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs, run: &mut Run) -> Result<()> {
    let degree = args.avg_degree.round().max(1.0) as usize;
    let need_nodes = || args.nodes.ok_or_else(|| Error::Spec("--nodes is required".into()));
    let spec = match args.family {
        FamilyArg::Er => GeneratorSpec::erdos_renyi(need_nodes()?, args.avg_degree, cli.seed),
        FamilyArg::SmallWorld => GeneratorSpec::small_world(
            need_nodes()?,
            args.ring_degree.unwrap_or(degree),
            args.rewire_prob,
            cli.seed,
        ),
        FamilyArg::ScaleFree => GeneratorSpec::scale_free(need_nodes()?, args.attach.unwrap_or(degree), cli.seed),
        FamilyArg::Kronecker => {
            let text = args
                .kronecker_seed
                .as_deref()
                .ok_or_else(|| Error::Spec("--kronecker-seed is required".into()))?;
            GeneratorSpec::kronecker(parse_matrix(text)?, args.power, cli.seed)
        }
    };
    let topology = generate(&spec)?;
    let mut net = sample_rates(&topology, cli.seed, args.rate_lo, args.rate_hi)?;
    let k = net.node_count();
    if let Some(b) = args.self_rate {
        net = net.with_self_rates(vec![b; k])?;
    }
    if let Some(g) = args.recovery_rate {
        net = net.with_recovery_rates(vec![g; k])?;
    }
    run.phase("generate");
    let out = run.output(&args.out);
    write_edge_list(&net, create(&out)?, &[run.tag()])?;
    let record = GenerationRecord::new(&spec, args.rate_lo, args.rate_hi, cli.seed, &net);
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".json");
    let sidecar = run.output(Path::new(&sidecar));
    write_json(run, &sidecar, &record)?;
    if args.self_rate.is_some() || args.recovery_rate.is_some() {
        let attrs = run.output(&args.out.with_extension("attrs.csv"));
        write_node_attributes(&net, create(&attrs)?)?;
    }
    run.phase("write");
    eprintln!("{} nodes, {} edges", k, net.edge_count());
    Ok(())
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, run: &mut Run) -> Result<()> {
    let (net, sources) = load(run, &args.net)?;
    let times = grid(&args.grid)?;
    let horizon = args.grid.t_max;
    let out = run.output(&args.out);
    let density = match &args.emit_cascades {
        Some(path) => {
            let cascades = run_ensemble(&net, &sources, horizon, args.cascades, cli.seed, cli.workers)?;
            run.phase("simulate");
            let path = run.output(path);
            write_cascades(&cascades, create(&path)?)?;
            empirical_density(&cascades, &times)?
        }
        None => ensemble_density(&net, &sources, horizon, args.cascades, cli.seed, cli.workers, &times)?,
    };
    run.phase("simulate");
    density.write_csv(create(&out)?, Some(&run.tag()))?;
    if let Some(path) = &args.emit_curve {
        let curve = influx::fpe::InfluenceCurve {
            times: density.times.clone(),
            sigma: density.influence(),
            provenance: influx::fpe::Provenance::monte_carlo(net.node_count(), args.cascades, Some(cli.seed)),
        };
        let path = run.output(path);
        write_curve(&curve, create(&path)?, &[run.tag()])?;
    }
    if let Some(path) = &args.emit_rates {
        let rates = empirical_rates(&density)?;
        let path = run.output(path);
        write_rate_series(&rates, create(&path)?, &[run.tag()])?;
    }
    run.phase("write");
    Ok(())
}

fn cmd_predict(args: &PredictArgs, run: &mut Run) -> Result<()> {
    let (net, sources) = load(run, &args.net)?;
    let times = grid(&args.grid)?;
    let solver = match args.solver {
        SolverArg::Auto => Solver::Auto,
        SolverArg::Rk4 => Solver::Rk4 { step: args.step },
        SolverArg::Expm => Solver::Expm,
    };
    let prediction = predict(&net, &sources, &times, &method(args.method, &args.tree_width)?, solver)?;
    run.phase("predict");
    let out = run.output(&args.out);
    let mut comments = vec![run.tag()];
    if let Some(layers) = &prediction.tree_layers {
        if let Some(last) = layers.last() {
            comments.push(format!("tree_retained_mass={}", fmt_num(last.retained_mass)));
        }
    }
    write_curve(&prediction.curve, create(&out)?, &comments)?;
    if let Some(path) = &args.emit_density {
        let path = run.output(path);
        let rho: Vec<Vec<f64>> = prediction.densities.iter().map(|d| d.rho.clone()).collect();
        write_density_csv(&times, &rho, create(&path)?, Some(&run.tag()))?;
    }
    if let Some(path) = &args.emit_rates {
        let path = run.output(path);
        write_rate_profile(&prediction.rates, create(&path)?, &[run.tag()])?;
    }
    run.phase("write");
    Ok(())
}

fn cmd_oracle(args: &OracleArgs, run: &mut Run) -> Result<()> {
    let (net, sources) = load(run, &args.net)?;
    let times = grid(&args.grid)?;
    let solution = exact_solution(&net, &sources, &times, args.node_limit)?;
    run.phase("solve");
    let out = run.output(&args.out);
    write_curve(&solution.influence(), create(&out)?, &[run.tag()])?;
    if let Some(path) = &args.emit_density {
        let path = run.output(path);
        let rho: Vec<Vec<f64>> = solution.densities.iter().map(|d| d.rho.clone()).collect();
        write_density_csv(&times, &rho, create(&path)?, Some(&run.tag()))?;
    }
    if let Some(path) = &args.emit_rates {
        let path = run.output(path);
        write_rate_series(&solution.rates, create(&path)?, &[run.tag()])?;
    }
    run.phase("write");
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, run: &mut Run) -> Result<()> {
    let (net, sources) = load(run, &args.net)?;
    let times = grid(&args.grid)?;
    let estimate = match &args.rates {
        Some(path) => {
            run.input(path)?;
            read_rate_profile(BufReader::new(File::open(path)?))?
        }
        None => match method(args.method, &args.tree_width)? {
            Method::Dist => influx::fpe::rates_dist(&net, &sources)?,
            Method::Tree(w) => influx::fpe::rates_tree(&net, &sources, &w)?.profile,
        },
    };
    let report = verify_bounds(&net, &sources, &estimate, &times, args.eps)?;
    run.phase("verify");
    let out = run.output(&args.out);
    write_json(run, &out, &report)?;
    let held = report.rows.iter().filter(|r| r.hypothesis).count();
    println!(
        "hypothesis holds at {held}/{} times; envelope violations: {}",
        report.rows.len(),
        report.violations()
    );
    Ok(())
}

fn cmd_compare(args: &CompareArgs, run: &mut Run) -> Result<()> {
    run.input(&args.predicted)?;
    run.input(&args.reference)?;
    let a = read_curve(BufReader::new(File::open(&args.predicted)?))?;
    let b = read_curve(BufReader::new(File::open(&args.reference)?))?;
    let cmp = compare_curves(&a, &b)?;
    let out = run.output(&args.out);
    write_json(run, &out, &cmp)?;
    println!(
        "max relative error {}, mean relative error {}, max absolute error {}",
        fmt_num(cmp.max_relative),
        fmt_num(cmp.mean_relative),
        fmt_num(cmp.max_absolute)
    );
    Ok(())
}

fn cmd_bench(cli: &Cli, args: &BenchArgs, run: &mut Run) -> Result<()> {
    let degree = args.avg_degree.round().max(1.0) as usize;
    let input = match args.input {
        BenchInputArg::Profile => BenchInput::Profile,
        BenchInputArg::Er => BenchInput::Network(Family::ErdosRenyi {
            avg_degree: args.avg_degree,
        }),
        BenchInputArg::SmallWorld => BenchInput::Network(Family::SmallWorld {
            ring_degree: degree,
            rewire_prob: 0.1,
        }),
        BenchInputArg::ScaleFree => BenchInput::Network(Family::ScaleFree { attach: degree }),
    };
    let sizes = args
        .sizes
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::Spec(format!("bad size {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let report = bench_rk4(&sizes, &input, args.steps, cli.seed, available_memory())?;
    run.phase("bench");
    let out = run.output(&args.out);
    let mut w = create(&out)?;
    writeln!(w, "# {}", run.tag())?;
    if let Some(slope) = report.slope {
        writeln!(w, "# loglog_slope={}", fmt_num(slope))?;
    }
    writeln!(w, "nodes,steps,estimate_seconds,solve_seconds,bytes")?;
    for r in &report.rows {
        let est = r.estimate_seconds.map(fmt_num).unwrap_or_default();
        writeln!(w, "{},{},{est},{},{}", r.nodes, r.steps, fmt_num(r.solve_seconds), r.bytes)?;
        println!("K={:>10}  solve {:.3}s", r.nodes, r.solve_seconds);
    }
    drop(w);
    if let Some(slope) = report.slope {
        println!("log-log slope {slope:.3}");
    }
    if let Some(reason) = report.refused {
        return Err(Error::Resource(reason));
    }
    Ok(())
}

fn cmd_plot(args: &PlotArgs, run: &mut Run) -> Result<()> {
    let mut series = Vec::new();
    for path in &args.inputs {
        run.input(path)?;
        let curve = read_curve(BufReader::new(File::open(path)?))?;
        series.push(Series {
            label: path.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
            x: curve.times,
            y: curve.sigma,
        });
    }
    let chart = Chart {
        title: args.title.clone(),
        x_label: "t".into(),
        y_label: "sigma".into(),
        log_x: false,
        log_y: args.log_y,
        series,
    };
    let svg = render_svg(&chart)?;
    let out = run.output(&args.out);
    let (head, rest) = svg.split_once('\n').unwrap_or((&svg, ""));
    fs::write(&out, format!("{head}\n<!-- {} -->\n{rest}", run.tag()))?;
    Ok(())
}

fn cmd_rerun(args: &RerunArgs) -> Result<()> {
    let recorded = RunManifest::read(&args.manifest)?;
    let cli = Cli::try_parse_from(std::iter::once("influx".to_string()).chain(recorded.argv.iter().cloned()))
        .map_err(|e| Error::Spec(format!("manifest holds invalid arguments: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(Error::Spec("manifest records another rerun".into()));
    }
    dispatch(&cli, recorded.argv.clone())?;
    if args.no_check {
        return Ok(());
    }
    let changed = recorded.changed_outputs()?;
    if changed.is_empty() {
        println!("all {} outputs reproduced", recorded.outputs.len());
        Ok(())
    } else {
        Err(Error::Numerical(format!("outputs differ from the manifest: {}", changed.join(", "))))
    }
}

fn dispatch(cli: &Cli, argv: Vec<String>) -> Result<()> {
    let (name, seeded) = match &cli.command {
        Command::Generate(_) => ("generate", true),
        Command::Simulate(_) => ("simulate", true),
        Command::Predict(_) => ("predict", false),
        Command::Oracle(_) => ("oracle", false),
        Command::VerifyBounds(_) => ("verify-bounds", false),
        Command::Compare(_) => ("compare", false),
        Command::Bench(_) => ("bench", true),
        Command::Plot(_) => ("plot", false),
        Command::Rerun(args) => return cmd_rerun(args),
    };
    let mut run = Run::new(cli, name, argv, seeded)?;
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(cli, a, &mut run),
        Command::Simulate(a) => cmd_simulate(cli, a, &mut run),
        Command::Predict(a) => cmd_predict(a, &mut run),
        Command::Oracle(a) => cmd_oracle(a, &mut run),
        Command::VerifyBounds(a) => cmd_verify(a, &mut run),
        Command::Compare(a) => cmd_compare(a, &mut run),
        Command::Bench(a) => cmd_bench(cli, a, &mut run),
        Command::Plot(a) => cmd_plot(a, &mut run),
        Command::Rerun(_) => unreachable!(),
    };
    // a refused benchmark still leaves its partial table and manifest
    if result.is_ok() || matches!(result, Err(Error::Resource(_))) && !run.outputs.is_empty() {
        run.finish()?;
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("influx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
