//! Transition-rate profiles and the two network-based estimators.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeSet, PropagationNetwork};

/// Lumped transition rates: `q_k` moves `k -> k+1` (for `k = 0..K-1`),
/// `r_k` moves `k -> k-1` (for `k = 1..K`).
///
/// Either constant in time or sampled on a time grid, in which case values
/// between samples are linearly interpolated and held constant outside the
/// sampled range.
#[derive(Clone, Debug, PartialEq)]
pub struct RateProfile {
    node_count: usize,
    kind: ProfileKind,
}

#[derive(Clone, Debug, PartialEq)]
enum ProfileKind {
    Constant {
        q: Vec<f64>,
        r: Option<Vec<f64>>,
    },
    Sampled {
        times: Vec<f64>,
        q: Vec<Vec<f64>>,
        r: Option<Vec<Vec<f64>>>,
    },
}

fn check_values(what: &str, values: &[f64], k: usize) -> Result<()> {
    if values.len() != k {
        return Err(Error::Domain(format!(
            "{what} must have {k} entries, got {}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Domain(format!(
            "{what} entries must be finite and nonnegative, found {v}"
        )));
    }
    Ok(())
}

impl RateProfile {
    /// Constant forward rates only (`r = 0`); `q.len()` is the node count.
    pub fn constant(q: Vec<f64>) -> Result<Self> {
        let k = q.len();
        if k == 0 {
            return Err(Error::Domain("rate profile needs at least one node".into()));
        }
        check_values("q", &q, k)?;
        Ok(RateProfile {
            node_count: k,
            kind: ProfileKind::Constant { q, r: None },
        })
    }

    /// Constant rates with recovery; `r[k - 1]` holds `r_k`.
    pub fn constant_with_recovery(q: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let mut p = RateProfile::constant(q)?;
        check_values("r", &r, p.node_count)?;
        p.kind = match p.kind {
            ProfileKind::Constant { q, .. } => ProfileKind::Constant { q, r: Some(r) },
            sampled => sampled,
        };
        Ok(p)
    }

    /// Rates sampled at strictly increasing `times`; each row has one entry per `k`.
    pub fn sampled(times: Vec<f64>, q: Vec<Vec<f64>>, r: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if times.is_empty() || times.len() != q.len() {
            return Err(Error::Domain("sampled profile needs one q row per time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || !times.iter().all(|t| t.is_finite()) {
            return Err(Error::Domain("sample times must be finite and strictly increasing".into()));
        }
        let k = q[0].len();
        if k == 0 {
            return Err(Error::Domain("rate profile needs at least one node".into()));
        }
        for row in &q {
            check_values("q", row, k)?;
        }
        if let Some(r) = &r {
            if r.len() != times.len() {
                return Err(Error::Domain("sampled profile needs one r row per time".into()));
            }
            for row in r {
                check_values("r", row, k)?;
            }
        }
        Ok(RateProfile {
            node_count: k,
            kind: ProfileKind::Sampled { times, q, r },
        })
    }

    /// Number of network nodes `K`; the state space is `0..=K`.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant { .. })
    }

    pub fn has_recovery(&self) -> bool {
        match &self.kind {
            ProfileKind::Constant { r, .. } => r.as_ref().is_some_and(|r| r.iter().any(|&v| v > 0.0)),
            ProfileKind::Sampled { r, .. } => r
                .as_ref()
                .is_some_and(|r| r.iter().flatten().any(|&v| v > 0.0)),
        }
    }

    pub fn constant_q(&self) -> Option<&[f64]> {
        match &self.kind {
            ProfileKind::Constant { q, .. } => Some(q),
            ProfileKind::Sampled { .. } => None,
        }
    }

    /// Constant recovery rates, `None` for SI or sampled profiles.
    pub fn constant_r(&self) -> Option<&[f64]> {
        match &self.kind {
            ProfileKind::Constant { r, .. } => r.as_deref(),
            ProfileKind::Sampled { .. } => None,
        }
    }

    pub fn sample_times(&self) -> Option<&[f64]> {
        match &self.kind {
            ProfileKind::Constant { .. } => None,
            ProfileKind::Sampled { times, .. } => Some(times),
        }
    }

    /// Fills `q` (length K) and `r` (length K, `r[k-1] = r_k`) with the rates at `t`.
    pub fn rates_at(&self, t: f64, q: &mut [f64], r: &mut [f64]) {
        match &self.kind {
            ProfileKind::Constant { q: cq, r: cr } => {
                q.copy_from_slice(cq);
                match cr {
                    Some(cr) => r.copy_from_slice(cr),
                    None => r.fill(0.0),
                }
            }
            ProfileKind::Sampled {
                times,
                q: sq,
                r: sr,
            } => {
                let (lo, hi, w) = bracket(times, t);
                let mix = |a: &[f64], b: &[f64], out: &mut [f64]| {
                    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                        *o = x + w * (y - x);
                    }
                };
                mix(&sq[lo], &sq[hi], q);
                match sr {
                    Some(sr) => mix(&sr[lo], &sr[hi], r),
                    None => r.fill(0.0),
                }
            }
        }
    }

    /// Largest `q_k + r_k` over all `k` (and all samples).
    pub fn max_exit_rate(&self) -> f64 {
        let k = self.node_count;
        let row_max = |q: &[f64], r: Option<&[f64]>| {
            (0..=k)
                .map(|j| {
                    let qj = if j < k { q[j] } else { 0.0 };
                    let rj = match r {
                        Some(r) if j >= 1 => r[j - 1],
                        _ => 0.0,
                    };
                    qj + rj
                })
                .fold(0.0, f64::max)
        };
        match &self.kind {
            ProfileKind::Constant { q, r } => row_max(q, r.as_deref()),
            ProfileKind::Sampled { q, r, .. } => (0..q.len())
                .map(|i| row_max(&q[i], r.as_ref().map(|r| r[i].as_slice())))
                .fold(0.0, f64::max),
        }
    }

    /// Largest forward rate `q_k`.
    pub fn max_q(&self) -> f64 {
        match &self.kind {
            ProfileKind::Constant { q, .. } => q.iter().copied().fold(0.0, f64::max),
            ProfileKind::Sampled { q, .. } => q.iter().flatten().copied().fold(0.0, f64::max),
        }
    }
}

/// Indices of the samples around `t` and the interpolation weight.
fn bracket(times: &[f64], t: f64) -> (usize, usize, f64) {
    let n = times.len();
    if t <= times[0] {
        return (0, 0, 0.0);
    }
    if t >= times[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let hi = times.partition_point(|&s| s <= t);
    let lo = hi - 1;
    if times[lo] == t {
        return (lo, lo, 0.0);
    }
    (lo, hi, (t - times[lo]) / (times[hi] - times[lo]))
}

/// Time-sampled rates where some cells may be undefined (too little mass
/// in state `k` to estimate them).
#[derive(Clone, Debug, PartialEq)]
pub struct RateSeries {
    pub times: Vec<f64>,
    /// `q[m][k]` for `k = 0..K-1`.
    pub q: Vec<Vec<Option<f64>>>,
    /// `r[m][k - 1]` for `k = 1..K`, when recovery is modelled.
    pub r: Option<Vec<Vec<Option<f64>>>>,
}

fn fill_column(rows: &[Vec<Option<f64>>]) -> Vec<Vec<f64>> {
    let m = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; k]; m];
    for j in 0..k {
        let defined: Vec<usize> = (0..m).filter(|&i| rows[i][j].is_some()).collect();
        if defined.is_empty() {
            continue;
        }
        for (i, row) in out.iter_mut().enumerate() {
            let pos = defined.partition_point(|&d| d < i);
            // nearest defined sample, preferring the earlier one on ties
            let best = match (pos.checked_sub(1).map(|p| defined[p]), defined.get(pos)) {
                (Some(a), Some(&b)) if b - i < i - a => b,
                (Some(a), _) => a,
                (None, Some(&b)) => b,
                (None, None) => unreachable!(),
            };
            row[j] = rows[best][j].unwrap_or(0.0).max(0.0);
        }
    }
    out
}

impl RateSeries {
    pub fn node_count(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }

    /// Sampled profile with undefined cells replaced by the nearest defined
    /// sample in time (zero when a rate is never defined); negative
    /// estimates are clamped to zero.
    pub fn to_profile(&self) -> Result<RateProfile> {
        RateProfile::sampled(
            self.times.clone(),
            fill_column(&self.q),
            self.r.as_ref().map(|r| fill_column(r)),
        )
    }
}

/// FPE-dist: `q_k = alpha(U_k) + beta(U_k^c)` where `U_k` holds the `k`
/// nodes closest to the sources in activation distance.
///
/// States below `|S|` get `q_k = 0` in the SI case since they are never
/// visited; with recovery they are reachable and use the same prefix sets.
/// Past the number of reachable nodes every `q_k` is zero. With recovery,
/// `r_k = gamma(U_k)`.
pub fn rates_dist(net: &PropagationNetwork, sources: &NodeSet) -> Result<RateProfile> {
    let dist = net.shortest_activation_distances(sources)?;
    let order = crate::graph::ascending_activation_order(&dist);
    let k_total = net.node_count();
    let reachable = dist.iter().filter(|d| d.is_finite()).count();
    let recovery = net.has_recovery();
    let beta_total: f64 = net.self_rates().iter().sum();

    let mut in_set = vec![false; k_total];
    let mut alpha = 0.0;
    let mut beta_in = 0.0;
    let mut gamma_in = 0.0;
    let mut q = vec![0.0; k_total];
    let mut r = vec![0.0; k_total];
    for k in 0..k_total {
        // prefix U_k = order[..k]
        if (k >= sources.len() || recovery) && k < reachable {
            q[k] = (alpha + (beta_total - beta_in)).max(0.0);
        }
        let v = order[k];
        for (i, a) in net.in_edges(v) {
            if in_set[i] {
                alpha -= a;
            }
        }
        for (j, a) in net.out_edges(v) {
            if !in_set[j] {
                alpha += a;
            }
        }
        in_set[v] = true;
        beta_in += net.self_rate(v);
        gamma_in += net.recovery_rate(v);
        r[k] = gamma_in;
    }
    if recovery {
        RateProfile::constant_with_recovery(q, r)
    } else {
        RateProfile::constant(q)
    }
}

/// Number of candidate sets kept per layer of the FPE-tree search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeWidth {
    Constant(usize),
    /// Entry `k` applies to layer `k`; the last entry repeats.
    PerLayer(Vec<usize>),
}

impl TreeWidth {
    pub fn at(&self, k: usize) -> usize {
        match self {
            TreeWidth::Constant(m) => *m,
            TreeWidth::PerLayer(ms) => ms.get(k).or(ms.last()).copied().unwrap_or(0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TreeWidth::Constant(m) => *m >= 1,
            TreeWidth::PerLayer(ms) => !ms.is_empty() && ms.iter().all(|&m| m >= 1),
        };
        if !ok {
            return Err(Error::Spec("tree width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Diagnostics for one layer of the FPE-tree search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeLayer {
    pub size: usize,
    /// Distinct sets generated for this layer before pruning.
    pub candidates: usize,
    pub kept: usize,
    /// Share of the layer's generated probability that survived pruning.
    pub kept_fraction: f64,
    /// Jump-chain probability of the kept sets (no renormalization).
    pub retained_mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEstimate {
    pub profile: RateProfile,
    pub layers: Vec<TreeLayer>,
}

struct Candidate {
    set: NodeSet,
    /// Probability renormalized within the layer.
    p: f64,
    alpha: f64,
}

/// FPE-tree: keeps the most probable active sets of each size, grown one
/// activation at a time along the embedded jump chain.
///
/// A set `U` grows to `U + j` with probability
/// `(alpha(j|U) + beta_j) / (alpha(U) + beta(U^c))`. Children reached from
/// several parents are merged by summing probabilities, sorted by
/// probability (ties: lexicographic on sorted ids) and truncated to the
/// layer width. `q_k` is the probability-weighted mean of
/// `alpha(U) + beta(U^c)` over the kept sets, renormalized to the kept mass.
pub fn rates_tree(net: &PropagationNetwork, sources: &NodeSet, width: &TreeWidth) -> Result<TreeEstimate> {
    width.validate()?;
    if sources.universe() != net.node_count() {
        return Err(Error::Domain("source set does not match the network".into()));
    }
    if sources.is_empty() && !net.has_self_activation() {
        return Err(Error::Precondition(
            "FPE-tree needs a nonempty source set or self-activation".into(),
        ));
    }
    if net.has_recovery() {
        return Err(Error::Unsupported(
            "FPE-tree grows activation sets only; use rates_dist with recovery".into(),
        ));
    }
    let k_total = net.node_count();
    let beta: &[f64] = net.self_rates();
    let any_beta = net.has_self_activation();
    let beta_total: f64 = beta.iter().sum();

    let mut q = vec![0.0; k_total];
    let mut layers = Vec::new();
    let start = sources.len();
    let mut layer = vec![Candidate {
        set: sources.clone(),
        p: 1.0,
        alpha: net.frontier_rate(sources)?,
    }];
    let mut abs_mass = 1.0;
    layers.push(TreeLayer {
        size: start,
        candidates: 1,
        kept: 1,
        kept_fraction: 1.0,
        retained_mass: 1.0,
    });

    let mut push = vec![0.0; k_total];
    let mut touched: Vec<usize> = Vec::new();
    for k in start..k_total {
        let exit = |c: &Candidate| {
            let beta_out = beta_total - c.set.iter().map(|i| beta[i]).sum::<f64>();
            c.alpha + beta_out.max(0.0)
        };
        q[k] = layer.iter().map(|c| c.p * exit(c)).sum();

        if k + 1 == k_total {
            break;
        }
        let mut children: HashMap<NodeSet, (f64, f64)> = HashMap::new();
        for c in &layer {
            touched.clear();
            for i in c.set.iter() {
                for (j, a) in net.out_edges(i) {
                    if !c.set.contains(j) {
                        if push[j] == 0.0 {
                            touched.push(j);
                        }
                        push[j] += a;
                    }
                }
            }
            if any_beta {
                for (j, &b) in beta.iter().enumerate() {
                    if b > 0.0 && !c.set.contains(j) && push[j] == 0.0 {
                        touched.push(j);
                    }
                }
            }
            let total = exit(c);
            for &j in &touched {
                let from_edges = push[j];
                push[j] = 0.0;
                let w = from_edges + if any_beta { beta[j] } else { 0.0 };
                if w <= 0.0 || total <= 0.0 {
                    continue;
                }
                let child = c.set.with(j);
                let p = c.p * w / total;
                match children.get_mut(&child) {
                    Some(entry) => entry.0 += p,
                    None => {
                        let out_new: f64 = net
                            .out_edges(j)
                            .filter(|&(l, _)| !child.contains(l))
                            .map(|(_, a)| a)
                            .sum();
                        let alpha = c.alpha - from_edges + out_new;
                        children.insert(child, (p, alpha.max(0.0)));
                    }
                }
            }
        }
        if children.is_empty() {
            break;
        }
        let mut pool: Vec<Candidate> = children
            .into_iter()
            .map(|(set, (p, alpha))| Candidate { set, p, alpha })
            .collect();
        let generated = pool.len();
        let pool_mass: f64 = pool.iter().map(|c| c.p).sum();
        pool.sort_by(|a, b| b.p.total_cmp(&a.p).then_with(|| a.set.cmp(&b.set)));
        pool.truncate(width.at(k + 1));
        let kept_mass: f64 = pool.iter().map(|c| c.p).sum();
        for c in &mut pool {
            c.p /= kept_mass;
        }
        abs_mass *= kept_mass;
        layers.push(TreeLayer {
            size: k + 1,
            candidates: generated,
            kept: pool.len(),
            kept_fraction: kept_mass / pool_mass,
            retained_mass: abs_mass,
        });
        layer = pool;
    }
    Ok(TreeEstimate {
        profile: RateProfile::constant(q)?,
        layers,
    })
}
