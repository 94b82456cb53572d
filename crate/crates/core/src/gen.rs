//! Reproducible random network generators and edge-rate samplers.
//!
//! Conventions for the families whose parameters are not pinned elsewhere:
//!
//! * Erdős–Rényi: directed `G(K, p)` without self-loops, `p = d / (K - 1)`
//!   for average out-degree `d`.
//! * Small-world: Watts–Strogatz ring where each node links to
//!   `ring_degree / 2` neighbours per side, each link rewired with
//!   probability `rewire_prob`; every undirected link then becomes two
//!   directed edges, so the average out-degree equals `ring_degree`.
//! * Scale-free: preferential attachment seeded by a complete digraph on
//!   `attach + 1` nodes; each arriving node sends `attach` edges to distinct
//!   existing nodes picked proportionally to their total degree.
//! * Kronecker: stochastic Kronecker power of a square seed matrix, each
//!   off-diagonal pair `(i, j)` kept independently with the probability
//!   given by the power's entry.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PropagationNetwork;
use crate::rng::{stream_rng, RATE_STREAM, RNG_ALGORITHM, TOPOLOGY_STREAM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ErdosRenyi { avg_degree: f64 },
    SmallWorld { ring_degree: usize, rewire_prob: f64 },
    ScaleFree { attach: usize },
    Kronecker { seed_matrix: Vec<Vec<f64>>, power: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub nodes: usize,
    pub seed: u64,
}

/// Edge structure of a generated network, before rates are attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub node_count: usize,
    /// Sorted `(source, target)` pairs without duplicates or self-loops.
    pub edges: Vec<(u32, u32)>,
}

impl Topology {
    pub fn mean_out_degree(&self) -> f64 {
        self.edges.len() as f64 / self.node_count as f64
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Spec(format!("{name} must lie in [0,1], got {p}")));
    }
    Ok(())
}

impl GeneratorSpec {
    pub fn erdos_renyi(nodes: usize, avg_degree: f64, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::ErdosRenyi { avg_degree },
            nodes,
            seed,
        }
    }

    pub fn small_world(nodes: usize, ring_degree: usize, rewire_prob: f64, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::SmallWorld {
                ring_degree,
                rewire_prob,
            },
            nodes,
            seed,
        }
    }

    pub fn scale_free(nodes: usize, attach: usize, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::ScaleFree { attach },
            nodes,
            seed,
        }
    }

    /// The node count is implied: `seed_matrix.len().pow(power)`.
    pub fn kronecker(seed_matrix: Vec<Vec<f64>>, power: u32, seed: u64) -> Self {
        let nodes = seed_matrix.len().saturating_pow(power);
        GeneratorSpec {
            family: Family::Kronecker { seed_matrix, power },
            nodes,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.nodes;
        if k == 0 {
            return Err(Error::Spec("node count must be at least 1".into()));
        }
        match &self.family {
            Family::ErdosRenyi { avg_degree } => {
                if !(avg_degree.is_finite() && *avg_degree >= 0.0) {
                    return Err(Error::Spec(format!("average degree {avg_degree} is invalid")));
                }
                if *avg_degree > (k - 1) as f64 {
                    return Err(Error::Spec(format!(
                        "average degree {avg_degree} impossible with {k} nodes"
                    )));
                }
            }
            Family::SmallWorld {
                ring_degree,
                rewire_prob,
            } => {
                if ring_degree % 2 != 0 || *ring_degree >= k {
                    return Err(Error::Spec(format!(
                        "ring degree must be even and below {k}, got {ring_degree}"
                    )));
                }
                check_probability("rewire probability", *rewire_prob)?;
            }
            Family::ScaleFree { attach } => {
                if *attach == 0 || *attach >= k {
                    return Err(Error::Spec(format!(
                        "attachment count must be in 1..{k}, got {attach}"
                    )));
                }
            }
            Family::Kronecker { seed_matrix, power } => {
                let n = seed_matrix.len();
                if n < 2 || seed_matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::Spec("Kronecker seed must be square and at least 2x2".into()));
                }
                for &p in seed_matrix.iter().flatten() {
                    check_probability("Kronecker seed entry", p)?;
                }
                if *power == 0 {
                    return Err(Error::Spec("Kronecker power must be at least 1".into()));
                }
                if n.checked_pow(*power) != Some(k) {
                    return Err(Error::Spec(format!(
                        "Kronecker network has {n}^{power} nodes, {k} requested"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Samples the topology described by `spec`. Identical specs give identical output.
pub fn generate(spec: &GeneratorSpec) -> Result<Topology> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, TOPOLOGY_STREAM);
    let k = spec.nodes;
    let mut edges = match &spec.family {
        Family::ErdosRenyi { avg_degree } => {
            let p = if k > 1 { avg_degree / (k - 1) as f64 } else { 0.0 };
            erdos_renyi(k, p, &mut rng)
        }
        Family::SmallWorld {
            ring_degree,
            rewire_prob,
        } => small_world(k, *ring_degree, *rewire_prob, &mut rng),
        Family::ScaleFree { attach } => scale_free(k, *attach, &mut rng),
        Family::Kronecker { seed_matrix, power } => kronecker(seed_matrix, *power, &mut rng),
    };
    edges.sort_unstable();
    edges.dedup();
    Ok(Topology {
        node_count: k,
        edges,
    })
}

fn erdos_renyi<R: Rng>(k: usize, p: f64, rng: &mut R) -> Vec<(u32, u32)> {
    let slots = (k as u64) * (k as u64 - 1);
    let mut edges = Vec::new();
    if p <= 0.0 || slots == 0 {
        return edges;
    }
    let push = |edges: &mut Vec<(u32, u32)>, x: u64| {
        let i = x / (k as u64 - 1);
        let c = x % (k as u64 - 1);
        let j = if c < i { c } else { c + 1 };
        edges.push((i as u32, j as u32));
    };
    if p >= 1.0 {
        (0..slots).for_each(|x| push(&mut edges, x));
        return edges;
    }
    // geometric skipping over the K(K-1) off-diagonal slots
    let log_q = (1.0 - p).ln();
    let mut x: u64 = 0;
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (slots - x) as f64 {
            break;
        }
        x += skip as u64;
        push(&mut edges, x);
        x += 1;
        if x >= slots {
            break;
        }
    }
    edges
}

fn small_world<R: Rng>(k: usize, ring_degree: usize, rewire: f64, rng: &mut R) -> Vec<(u32, u32)> {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut links: Vec<(usize, usize)> = Vec::with_capacity(k * ring_degree / 2);
    let mut present = HashSet::new();
    for i in 0..k {
        for d in 1..=ring_degree / 2 {
            let j = (i + d) % k;
            links.push((i, j));
            present.insert(key(i, j));
        }
    }
    let mut degree = vec![ring_degree; k];
    for link in links.iter_mut() {
        if rng.gen::<f64>() >= rewire {
            continue;
        }
        let (i, old) = *link;
        if degree[i] >= k - 1 {
            continue;
        }
        let new = loop {
            let w = rng.gen_range(0..k);
            if w != i && !present.contains(&key(i, w)) {
                break w;
            }
        };
        present.remove(&key(i, old));
        present.insert(key(i, new));
        degree[old] -= 1;
        degree[new] += 1;
        *link = (i, new);
    }
    links
        .into_iter()
        .flat_map(|(a, b)| [(a as u32, b as u32), (b as u32, a as u32)])
        .collect()
}

fn scale_free<R: Rng>(k: usize, m: usize, rng: &mut R) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity(k * m);
    // each endpoint occurrence, so uniform draws are degree-proportional
    let mut pool: Vec<u32> = Vec::with_capacity(2 * k * m);
    for a in 0..=m {
        for b in 0..=m {
            if a != b {
                edges.push((a as u32, b as u32));
                pool.push(a as u32);
                pool.push(b as u32);
            }
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in (m + 1)..k {
        chosen.clear();
        while chosen.len() < m {
            let t = pool[rng.gen_range(0..pool.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((v as u32, t));
            pool.push(v as u32);
            pool.push(t);
        }
    }
    edges
}

/// Entry `(i, j)` of the `power`-fold Kronecker product of `seed`.
pub fn kronecker_probability(seed: &[Vec<f64>], power: u32, mut i: usize, mut j: usize) -> f64 {
    let n = seed.len();
    let mut p = 1.0;
    for _ in 0..power {
        p *= seed[i % n][j % n];
        i /= n;
        j /= n;
    }
    p
}

fn kronecker<R: Rng>(seed: &[Vec<f64>], power: u32, rng: &mut R) -> Vec<(u32, u32)> {
    let k = seed.len().pow(power);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j && rng.gen::<f64>() < kronecker_probability(seed, power, i, j) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    edges
}

/// Attaches independent uniform rates in the open interval `(lo, hi)`.
pub fn sample_rates(topology: &Topology, seed: u64, lo: f64, hi: f64) -> Result<PropagationNetwork> {
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi <= lo {
        return Err(Error::Spec(format!("rate band ({lo}, {hi}) is invalid")));
    }
    let mut rng = stream_rng(seed, RATE_STREAM);
    let edges = topology.edges.iter().map(|&(i, j)| {
        let rate = loop {
            let r = rng.gen_range(lo..hi);
            if r > lo {
                break r;
            }
        };
        (i as usize, j as usize, rate)
    });
    PropagationNetwork::from_edges(topology.node_count, edges.collect::<Vec<_>>())
}

/// Sidecar metadata written next to generated edge lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub spec: GeneratorSpec,
    pub rate_lo: f64,
    pub rate_hi: f64,
    pub rate_seed: u64,
    pub rng: String,
    pub node_count: usize,
    pub edge_count: usize,
}

impl GenerationRecord {
    pub fn new(spec: &GeneratorSpec, rate_lo: f64, rate_hi: f64, rate_seed: u64, net: &PropagationNetwork) -> Self {
        GenerationRecord {
            spec: spec.clone(),
            rate_lo,
            rate_hi,
            rate_seed,
            rng: RNG_ALGORITHM.to_string(),
            node_count: net.node_count(),
            edge_count: net.edge_count(),
        }
    }
}
