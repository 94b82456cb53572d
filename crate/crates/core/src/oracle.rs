//! Exact reference for small networks: the full `2^K`-state chain.
//!
//! Gives the exact active-count distribution, the exact lumped rates
//! `q_k(t) = E[alpha(U) + beta(U^c) | |U| = k]` and a numerical check of the
//! rate-error bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpe::{
    initial_state, solve_expm_grid, solve_rk4, InfluenceCurve, Provenance, RateProfile, RateSeries,
    StateDistribution,
};
use crate::graph::{NodeSet, PropagationNetwork};
use crate::uniform;

/// Largest network the oracle accepts unless told otherwise.
pub const DEFAULT_NODE_LIMIT: usize = 16;
/// A lumped rate is undefined when its state carries at most this much mass.
pub const UNDEFINED_MASS: f64 = 1e-12;
/// Mass tolerance of the uniformization series per grid interval.
const TOLERANCE: f64 = 1e-12;

/// Sparse generator over all subsets of the nodes (bit `i` set when node
/// `i` is active).
#[derive(Clone, Debug)]
pub struct FullStateChain {
    node_count: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    exit: Vec<f64>,
    /// `alpha(U) + beta(U^c)` per state.
    activation: Vec<f64>,
    /// `gamma(U)` per state.
    recovery: Vec<f64>,
}

impl FullStateChain {
    /// Builds the chain; refuses networks with more than `node_limit` nodes.
    pub fn new(net: &PropagationNetwork, node_limit: usize) -> Result<Self> {
        let k = net.node_count();
        if k > node_limit || k > 30 {
            return Err(Error::Resource(format!(
                "exact chain over {k} nodes needs 2^{k} states; limit is {}",
                node_limit.min(30)
            )));
        }
        let n = 1usize << k;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut rates = Vec::new();
        let mut exit = vec![0.0; n];
        let mut activation = vec![0.0; n];
        let mut recovery = vec![0.0; n];
        offsets.push(0);
        for u in 0..n {
            for j in 0..k {
                let bit = 1usize << j;
                let rate = if u & bit == 0 {
                    let a = net.self_rate(j)
                        + net
                            .in_edges(j)
                            .filter(|&(i, _)| u & (1 << i) != 0)
                            .map(|(_, a)| a)
                            .sum::<f64>();
                    activation[u] += a;
                    a
                } else {
                    let g = net.recovery_rate(j);
                    recovery[u] += g;
                    g
                };
                if rate > 0.0 {
                    targets.push((u ^ bit) as u32);
                    rates.push(rate);
                    exit[u] += rate;
                }
            }
            offsets.push(targets.len());
        }
        Ok(FullStateChain {
            node_count: k,
            offsets,
            targets,
            rates,
            exit,
            activation,
            recovery,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn state_count(&self) -> usize {
        self.exit.len()
    }

    /// Point mass on the state encoding `sources`.
    pub fn point_mass(&self, sources: &NodeSet) -> Result<Vec<f64>> {
        if sources.universe() != self.node_count {
            return Err(Error::Domain("source set does not match the network".into()));
        }
        let mut p = vec![0.0; self.state_count()];
        p[sources.as_mask() as usize] = 1.0;
        Ok(p)
    }

    /// Replaces `p` by `p exp(dt A)`.
    pub fn propagate(&self, p: &mut [f64], dt: f64) -> Result<()> {
        let lambda = self.exit.iter().copied().fold(0.0, f64::max);
        uniform::propagate(p, dt, lambda, TOLERANCE, |x, out| {
            for (u, (o, &xu)) in out.iter_mut().zip(x).enumerate() {
                *o = xu * (1.0 - self.exit[u] / lambda);
            }
            for (u, &xu) in x.iter().enumerate() {
                if xu == 0.0 {
                    continue;
                }
                let w = xu / lambda;
                for e in self.offsets[u]..self.offsets[u + 1] {
                    out[self.targets[e] as usize] += w * self.rates[e];
                }
            }
        })
    }

    /// Probability of each active count.
    pub fn lump(&self, p: &[f64]) -> Vec<f64> {
        let mut rho = vec![0.0; self.node_count + 1];
        for (u, &pu) in p.iter().enumerate() {
            rho[u.count_ones() as usize] += pu;
        }
        rho
    }

    /// Range of `alpha(U) + beta(U^c)` over sets of each size.
    pub fn activation_hull(&self) -> Vec<(f64, f64)> {
        hull(&self.activation, self.node_count)
    }

    /// Exact conditional rates for one full distribution: `(q, r)`, with
    /// `r[k - 1] = r_k`; `None` where the count carries no mass.
    fn conditional_rates(&self, p: &[f64], rho: &[f64]) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
        let k = self.node_count;
        let mut qa = vec![0.0; k + 1];
        let mut ra = vec![0.0; k + 1];
        for (u, &pu) in p.iter().enumerate() {
            let c = u.count_ones() as usize;
            qa[c] += pu * self.activation[u];
            ra[c] += pu * self.recovery[u];
        }
        let qh = hull(&self.activation, k);
        let rh = hull(&self.recovery, k);
        let cell = |c: usize, acc: &[f64], h: &[(f64, f64)]| {
            (rho[c] > UNDEFINED_MASS).then(|| (acc[c] / rho[c]).clamp(h[c].0, h[c].1))
        };
        let q = (0..k).map(|c| cell(c, &qa, &qh)).collect();
        let r = (1..=k).map(|c| cell(c, &ra, &rh)).collect();
        (q, r)
    }
}

fn hull(values: &[f64], k: usize) -> Vec<(f64, f64)> {
    let mut h = vec![(f64::INFINITY, f64::NEG_INFINITY); k + 1];
    for (u, &v) in values.iter().enumerate() {
        let c = u.count_ones() as usize;
        h[c] = (h[c].0.min(v), h[c].1.max(v));
    }
    h
}

/// Exact lumped distributions and rates on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub densities: Vec<StateDistribution>,
    pub rates: RateSeries,
}

impl ExactSolution {
    pub fn influence(&self) -> InfluenceCurve {
        let k = self.rates.node_count();
        InfluenceCurve {
            times: self.densities.iter().map(|d| d.time).collect(),
            sigma: self.densities.iter().map(StateDistribution::influence).collect(),
            provenance: Provenance::new("exact", k),
        }
    }
}

/// Solves the full chain from the sources and lumps it at each grid time.
pub fn exact_solution(
    net: &PropagationNetwork,
    sources: &NodeSet,
    grid: &[f64],
    node_limit: usize,
) -> Result<ExactSolution> {
    if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Domain("grid times must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("grid times must be nondecreasing".into()));
    }
    let chain = FullStateChain::new(net, node_limit)?;
    let mut p = chain.point_mass(sources)?;
    let mut t = 0.0;
    let mut densities = Vec::with_capacity(grid.len());
    let mut q = Vec::with_capacity(grid.len());
    let mut r = Vec::with_capacity(grid.len());
    for &target in grid {
        chain.propagate(&mut p, target - t)?;
        t = target;
        let rho = chain.lump(&p);
        let (qs, rs) = chain.conditional_rates(&p, &rho);
        q.push(qs);
        r.push(rs);
        densities.push(StateDistribution { time: target, rho });
    }
    Ok(ExactSolution {
        densities,
        rates: RateSeries {
            times: grid.to_vec(),
            q,
            r: net.has_recovery().then_some(r),
        },
    })
}

pub fn exact_density(net: &PropagationNetwork, sources: &NodeSet, grid: &[f64]) -> Result<Vec<StateDistribution>> {
    Ok(exact_solution(net, sources, grid, DEFAULT_NODE_LIMIT)?.densities)
}

pub fn exact_rates(net: &PropagationNetwork, sources: &NodeSet, grid: &[f64]) -> Result<RateSeries> {
    Ok(exact_solution(net, sources, grid, DEFAULT_NODE_LIMIT)?.rates)
}

/// Admissible relative rate error `theta_k(t)` for a target accuracy `eps`.
///
/// `max_rate` is the largest edge rate and `max_degree` the largest out-degree.
pub fn theta(k: usize, node_count: usize, t: f64, eps: f64, max_rate: f64, max_degree: usize) -> f64 {
    let cap = eps / (2.0 + eps);
    let spread = max_rate * k as f64 * t * (max_degree.min(node_count - k)) as f64;
    if spread <= 0.0 {
        return cap;
    }
    ((1.0 + eps / 2.0).ln() / spread).min(cap)
}

/// `c_K(t) = (1/K) sum_{j<K} (K - j) (q t)^j / j!`.
pub fn envelope_factor(node_count: usize, q_max: f64, t: f64) -> f64 {
    let x = q_max * t;
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 0..node_count {
        if j > 0 {
            term *= x / j as f64;
        }
        sum += (node_count - j) as f64 * term;
    }
    sum / node_count as f64
}

/// Bound on the relative influence error when every rate error stays
/// within `theta`: `((1+eps)^K - 1) min(1, c_K(t) exp(-alpha_min t))`.
pub fn envelope(node_count: usize, eps: f64, q_max: f64, min_rate: f64, t: f64) -> f64 {
    let scale = (1.0 + eps).powi(node_count as i32) - 1.0;
    scale * (envelope_factor(node_count, q_max, t) * (-min_rate * t).exp()).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub time: f64,
    /// Largest relative rate error seen up to this time.
    pub max_rate_error: f64,
    pub min_theta: f64,
    pub hypothesis: bool,
    pub influence_error: f64,
    pub envelope: f64,
}

impl BoundRow {
    /// The bound is only claimed where its hypothesis holds.
    pub fn violated(&self) -> bool {
        self.hypothesis && self.influence_error > self.envelope
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub node_count: usize,
    pub max_edge_rate: f64,
    pub min_edge_rate: f64,
    pub max_out_degree: usize,
    pub max_exact_rate: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violated()).count()
    }
}

/// Compares an estimated profile with the exact rates and checks the
/// influence error against the envelope at each grid time.
///
/// The relative rate error of `q_k` is skipped where the exact rate is
/// undefined; an estimate of a rate that is exactly zero counts as an
/// infinite error unless it is zero too. The hypothesis at `t` requires the
/// errors up to `t` to stay within `theta_k(t)` for every `k`.
pub fn verify_bounds(
    net: &PropagationNetwork,
    sources: &NodeSet,
    estimate: &RateProfile,
    grid: &[f64],
    eps: f64,
) -> Result<BoundReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Spec(format!("epsilon must be positive, got {eps}")));
    }
    if net.has_recovery() || estimate.has_recovery() {
        return Err(Error::Unsupported("bound covers pure-activation networks only".into()));
    }
    let k_total = net.node_count();
    if estimate.node_count() != k_total {
        return Err(Error::Domain("estimate does not match the network".into()));
    }
    let exact = exact_solution(net, sources, grid, DEFAULT_NODE_LIMIT)?;
    let rho0 = initial_state(k_total, sources.len())?;
    let est = if estimate.is_constant() {
        solve_expm_grid(estimate, &rho0, grid)?
    } else {
        let h = 0.1 / estimate.max_exit_rate().max(1e-12);
        let h = h.min(grid.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(h, f64::min));
        solve_rk4(estimate, &rho0, grid, h)?
    };

    let max_rate = net.max_rate();
    let min_rate = net.min_rate().unwrap_or(0.0);
    let degree = net.max_out_degree();
    let q_max = exact.rates.q.iter().flatten().flatten().copied().fold(0.0, f64::max);

    let mut running = vec![0.0f64; k_total];
    let mut q_hat = vec![0.0; k_total];
    let mut r_hat = vec![0.0; k_total];
    let mut rows = Vec::with_capacity(grid.len());
    for (m, &t) in grid.iter().enumerate() {
        estimate.rates_at(t, &mut q_hat, &mut r_hat);
        for k in 0..k_total {
            if let Some(q) = exact.rates.q[m][k] {
                let err = if q > 0.0 {
                    (q_hat[k] - q).abs() / q
                } else if q_hat[k] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                running[k] = running[k].max(err);
            }
        }
        let mut hypothesis = true;
        let mut min_theta = f64::INFINITY;
        for (k, &err) in running.iter().enumerate() {
            let th = theta(k, k_total, t, eps, max_rate, degree);
            min_theta = min_theta.min(th);
            hypothesis &= err <= th;
        }
        let sigma = exact.densities[m].influence();
        let sigma_hat = est[m].influence();
        rows.push(BoundRow {
            time: t,
            max_rate_error: running.iter().copied().fold(0.0, f64::max),
            min_theta,
            hypothesis,
            influence_error: (sigma_hat - sigma).abs() / sigma.max(f64::MIN_POSITIVE),
            envelope: envelope(k_total, eps, q_max, min_rate, t),
        });
    }
    Ok(BoundReport {
        epsilon: eps,
        node_count: k_total,
        max_edge_rate: max_rate,
        min_edge_rate: min_rate,
        max_out_degree: degree,
        max_exact_rate: q_max,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_is_exponential() {
        let net = PropagationNetwork::from_edges(2, [(0, 1, 0.7)]).unwrap();
        let s = NodeSet::from_ids(2, [0]).unwrap();
        let sol = exact_solution(&net, &s, &[0.0, 1.0, 3.0], 16).unwrap();
        for d in &sol.densities {
            let p = (-0.7 * d.time).exp();
            assert!((d.rho[1] - p).abs() < 1e-12);
            assert!((d.rho[2] - (1.0 - p)).abs() < 1e-11);
        }
        assert_eq!(sol.rates.q[1][0], None);
        assert_eq!(sol.rates.q[1][1], Some(0.7));
    }

    #[test]
    fn refuses_large_networks() {
        let edges: Vec<_> = (0..17).map(|i| (i, (i + 1) % 17, 1.0)).collect();
        let net = PropagationNetwork::from_edges(17, edges).unwrap();
        assert!(matches!(FullStateChain::new(&net, DEFAULT_NODE_LIMIT), Err(Error::Resource(_))));
    }

    #[test]
    fn recovery_transitions() {
        let net = PropagationNetwork::from_edges(2, [(0, 1, 1.0)])
            .unwrap()
            .with_recovery_rates(vec![0.5, 0.0])
            .unwrap();
        let chain = FullStateChain::new(&net, 16).unwrap();
        // state {0}: activate 1 at rate 1, recover 0 at rate 0.5
        assert_eq!(chain.exit[0b01], 1.5);
        assert_eq!(chain.exit[0b00], 0.0);
        let hull = chain.activation_hull();
        assert_eq!(hull[1], (0.0, 1.0));
    }

    #[test]
    fn envelope_factor_small_cases() {
        assert_eq!(envelope_factor(1, 3.0, 2.0), 1.0);
        // K=2: (2 + q t) / 2
        assert!((envelope_factor(2, 3.0, 2.0) - 4.0).abs() < 1e-15);
        assert_eq!(envelope_factor(5, 1.0, 0.0), 1.0);
    }

    #[test]
    fn theta_caps() {
        assert_eq!(theta(0, 4, 1.0, 0.1, 1.0, 2), 0.1 / 2.1);
        assert_eq!(theta(2, 4, 0.0, 0.1, 1.0, 2), 0.1 / 2.1);
        let th = theta(2, 4, 10.0, 0.1, 1.0, 2);
        assert!((th - 1.05f64.ln() / 40.0).abs() < 1e-15);
    }
}
