//! Exact stochastic simulation of the propagation process.
//!
//! [`simulate_cascade`] is a Gillespie direct-method sampler: with active
//! set `U` the waiting time to the next event is exponential with rate
//! `alpha(U) + beta(U^c) + gamma(U)`, and the event is picked with
//! probability proportional to its own rate. Per-node rates live in a
//! Fenwick tree so both selection and the updates that follow an event
//! cost `O(log K)` each.

mod density;
mod io;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use density::{
    empirical_density, empirical_influence, empirical_rates, ensemble_density, EmpiricalDensity,
};
pub use io::{read_cascades, write_cascades, write_density_csv};

use crate::error::{Error, Result};
use crate::graph::{NodeSet, PropagationNetwork};
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Activate,
    Recover,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub node: u32,
    pub kind: EventKind,
}

/// One sample path: source activations at time 0 followed by the events
/// that happened up to `horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub node_count: usize,
    pub sources: Vec<usize>,
    pub horizon: f64,
    pub events: Vec<Event>,
}

impl Cascade {
    /// Number of active nodes at time `t` (events at exactly `t` count).
    pub fn active_count_at(&self, t: f64) -> usize {
        let mut n: isize = 0;
        for e in self.events.iter().take_while(|e| e.time <= t) {
            n += match e.kind {
                EventKind::Activate => 1,
                EventKind::Recover => -1,
            };
        }
        n as usize
    }

    /// Checks ordering, source prefix and activate/recover alternation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(format!("invalid cascade: {msg}")));
        if self.events.len() < self.sources.len() {
            return bad("fewer events than sources".into());
        }
        for (e, &s) in self.events.iter().zip(&self.sources) {
            if e.time != 0.0 || e.kind != EventKind::Activate || e.node as usize != s {
                return bad("source activations must open the event list at time 0".into());
            }
        }
        let mut active = vec![false; self.node_count];
        let mut last = 0.0;
        for e in &self.events {
            if e.time < last || e.time > self.horizon {
                return bad(format!("event time {} out of order or past horizon", e.time));
            }
            last = e.time;
            let slot = active
                .get_mut(e.node as usize)
                .ok_or_else(|| Error::Domain(format!("event on unknown node {}", e.node)))?;
            match (e.kind, *slot) {
                (EventKind::Activate, false) => *slot = true,
                (EventKind::Recover, true) => *slot = false,
                _ => return bad(format!("node {} changes into its current state", e.node)),
            }
        }
        Ok(())
    }
}

/// Fenwick tree over per-node event rates.
struct RateTree {
    tree: Vec<f64>,
    weights: Vec<f64>,
    positive: usize,
    top_step: usize,
}

impl RateTree {
    fn new(weights: Vec<f64>) -> Self {
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            tree[i + 1] += w;
            let parent = (i + 1) + ((i + 1) & (!(i + 1) + 1));
            if parent <= n {
                let v = tree[i + 1];
                tree[parent] += v;
            }
        }
        let positive = weights.iter().filter(|&&w| w > 0.0).count();
        let top_step = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        RateTree {
            tree,
            weights,
            positive,
            top_step,
        }
    }

    fn set(&mut self, i: usize, w: f64) {
        let old = self.weights[i];
        if old == w {
            return;
        }
        self.positive = self.positive + (w > 0.0) as usize - (old > 0.0) as usize;
        self.weights[i] = w;
        let delta = w - old;
        let mut pos = i + 1;
        while pos < self.tree.len() {
            self.tree[pos] += delta;
            pos += pos & (!pos + 1);
        }
    }

    fn total(&self) -> f64 {
        let mut pos = self.weights.len();
        let mut sum = 0.0;
        while pos > 0 {
            sum += self.tree[pos];
            pos &= pos - 1;
        }
        sum
    }

    /// Index whose cumulative weight interval contains `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.weights.len();
        let mut pos = 0;
        let mut step = self.top_step;
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

fn check_preconditions(net: &PropagationNetwork, sources: &NodeSet, horizon: f64) -> Result<()> {
    if sources.universe() != net.node_count() {
        return Err(Error::Domain(format!(
            "source set over {} ids used with a {}-node network",
            sources.universe(),
            net.node_count()
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Precondition(format!("horizon must be positive, got {horizon}")));
    }
    if sources.is_empty() && !net.has_self_activation() {
        return Err(Error::Precondition(
            "empty source set without self-activation: nothing can happen".into(),
        ));
    }
    Ok(())
}

/// Samples one cascade up to `horizon`.
///
/// Stops early once no event can fire. Events strictly after the horizon
/// are discarded; an event landing exactly on it is kept.
pub fn simulate_cascade<R: Rng + ?Sized>(
    net: &PropagationNetwork,
    sources: &NodeSet,
    horizon: f64,
    rng: &mut R,
) -> Result<Cascade> {
    check_preconditions(net, sources, horizon)?;
    let k = net.node_count();
    let mut active = vec![false; k];
    let mut pressure = vec![0.0; k];
    let mut events = Vec::with_capacity(sources.len() * 2 + 16);
    for s in sources.iter() {
        active[s] = true;
        events.push(Event {
            time: 0.0,
            node: s as u32,
            kind: EventKind::Activate,
        });
    }
    for s in sources.iter() {
        for (j, a) in net.out_edges(s) {
            if !active[j] {
                pressure[j] += a;
            }
        }
    }
    let weights = (0..k)
        .map(|i| {
            if active[i] {
                net.recovery_rate(i)
            } else {
                pressure[i] + net.self_rate(i)
            }
        })
        .collect();
    let mut rates = RateTree::new(weights);

    let mut t = 0.0;
    while rates.positive > 0 {
        let total = rates.total();
        if total <= 0.0 {
            break;
        }
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / total;
        if t > horizon {
            break;
        }
        let node = loop {
            let pick = rates.find(rng.gen::<f64>() * total);
            // rounding in the tree can land on an empty slot
            if rates.weights[pick] > 0.0 {
                break pick;
            }
        };
        if active[node] {
            active[node] = false;
            events.push(Event {
                time: t,
                node: node as u32,
                kind: EventKind::Recover,
            });
            pressure[node] = net
                .in_edges(node)
                .filter(|&(i, _)| active[i])
                .map(|(_, a)| a)
                .sum();
            rates.set(node, pressure[node] + net.self_rate(node));
            for (l, _) in net.out_edges(node) {
                if !active[l] {
                    // recomputed rather than decremented to avoid drift
                    pressure[l] = net.in_edges(l).filter(|&(i, _)| active[i]).map(|(_, a)| a).sum();
                    rates.set(l, pressure[l] + net.self_rate(l));
                }
            }
        } else {
            active[node] = true;
            events.push(Event {
                time: t,
                node: node as u32,
                kind: EventKind::Activate,
            });
            rates.set(node, net.recovery_rate(node));
            for (l, a) in net.out_edges(node) {
                if !active[l] {
                    pressure[l] += a;
                    rates.set(l, pressure[l] + net.self_rate(l));
                }
            }
        }
    }
    Ok(Cascade {
        node_count: k,
        sources: sources.to_vec(),
        horizon,
        events,
    })
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs `n` independent cascades. Replica `r` draws from stream `r` of
/// `seed`, so the output does not depend on `workers` (0 means one per core).
pub fn run_ensemble(
    net: &PropagationNetwork,
    sources: &NodeSet,
    horizon: f64,
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Cascade>> {
    check_preconditions(net, sources, horizon)?;
    if n == 0 {
        return Err(Error::Precondition("ensemble size must be at least 1".into()));
    }
    with_pool(workers, || {
        (0..n)
            .into_par_iter()
            .map(|r| simulate_cascade(net, sources, horizon, &mut stream_rng(seed, r as u64)))
            .collect()
    })?
}
