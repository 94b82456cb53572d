//! Weighted directed propagation networks.
//!
//! A [`PropagationNetwork`] stores per-edge activation rates in compressed
//! adjacency form (offsets plus flat target/rate arrays) together with its
//! exact transpose, so both out- and in-neighbourhoods are contiguous
//! slices. Optional per-node self-activation and recovery rates default to
//! zero.

mod io;
mod nodeset;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub use io::{
    parse_edge_list, parse_node_attributes, read_network, write_edge_list, write_node_attributes,
    EdgeList,
};
pub use nodeset::NodeSet;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationNetwork {
    node_count: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    out_rates: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    in_rates: Vec<f64>,
    self_rates: Vec<f64>,
    recovery_rates: Vec<f64>,
}

fn check_rate(what: &str, node: usize, rate: f64) -> Result<()> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Domain(format!(
            "{what} of node {node} must be finite and nonnegative, got {rate}"
        )));
    }
    Ok(())
}

impl PropagationNetwork {
    /// Builds a network from `(source, target, rate)` triples.
    ///
    /// Rates must be finite and strictly positive. Self-loops and repeated
    /// `(source, target)` pairs are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if node_count == 0 {
            return Err(Error::Domain("a network needs at least one node".into()));
        }
        if node_count > u32::MAX as usize {
            return Err(Error::Resource(format!("{node_count} nodes exceeds the u32 id space")));
        }
        let mut list: Vec<(u32, u32, f64)> = Vec::new();
        for (i, j, rate) in edges {
            if i >= node_count || j >= node_count {
                return Err(Error::Domain(format!(
                    "edge ({i},{j}) references a node outside 0..{node_count}"
                )));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop on node {i}")));
            }
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::Domain(format!(
                    "edge ({i},{j}) has rate {rate}; rates must be finite and > 0"
                )));
            }
            list.push((i as u32, j as u32, rate));
        }
        list.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::Domain(format!("duplicate edge ({},{})", w[0].0, w[0].1)));
        }

        let mut out_offsets = vec![0usize; node_count + 1];
        let mut in_offsets = vec![0usize; node_count + 1];
        for &(i, j, _) in &list {
            out_offsets[i as usize + 1] += 1;
            in_offsets[j as usize + 1] += 1;
        }
        for v in 0..node_count {
            out_offsets[v + 1] += out_offsets[v];
            in_offsets[v + 1] += in_offsets[v];
        }
        let out_targets = list.iter().map(|e| e.1).collect();
        let out_rates = list.iter().map(|e| e.2).collect();

        // Transpose; visiting edges in source order keeps each in-list sorted.
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0u32; list.len()];
        let mut in_rates = vec![0f64; list.len()];
        for &(i, j, rate) in &list {
            let slot = &mut cursor[j as usize];
            in_sources[*slot] = i;
            in_rates[*slot] = rate;
            *slot += 1;
        }

        Ok(PropagationNetwork {
            node_count,
            out_offsets,
            out_targets,
            out_rates,
            in_offsets,
            in_sources,
            in_rates,
            self_rates: vec![0.0; node_count],
            recovery_rates: vec![0.0; node_count],
        })
    }

    pub fn with_self_rates(mut self, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != self.node_count {
            return Err(Error::Domain(format!(
                "expected {} self-activation rates, got {}",
                self.node_count,
                rates.len()
            )));
        }
        for (i, &b) in rates.iter().enumerate() {
            check_rate("self-activation rate", i, b)?;
        }
        self.self_rates = rates;
        Ok(self)
    }

    pub fn with_recovery_rates(mut self, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != self.node_count {
            return Err(Error::Domain(format!(
                "expected {} recovery rates, got {}",
                self.node_count,
                rates.len()
            )));
        }
        for (i, &g) in rates.iter().enumerate() {
            check_rate("recovery rate", i, g)?;
        }
        self.recovery_rates = rates;
        Ok(self)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Out-neighbours of `i` with their rates, sorted by target id.
    #[inline]
    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.out_offsets[i]..self.out_offsets[i + 1];
        self.out_targets[range.clone()]
            .iter()
            .zip(&self.out_rates[range])
            .map(|(&j, &a)| (j as usize, a))
    }

    /// In-neighbours of `j` with their rates, sorted by source id.
    #[inline]
    pub fn in_edges(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.in_offsets[j]..self.in_offsets[j + 1];
        self.in_sources[range.clone()]
            .iter()
            .zip(&self.in_rates[range])
            .map(|(&i, &a)| (i as usize, a))
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_offsets[i + 1] - self.out_offsets[i]
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.node_count).map(|i| self.out_degree(i)).max().unwrap_or(0)
    }

    /// All edges as `(source, target, rate)`, sorted by source then target.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count).flat_map(move |i| self.out_edges(i).map(move |(j, a)| (i, j, a)))
    }

    /// Rate of the edge `i -> j`, zero when absent.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        let range = self.out_offsets[i]..self.out_offsets[i + 1];
        match self.out_targets[range.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.out_rates[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.out_rates.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest edge rate, or `None` for an edgeless network.
    pub fn min_rate(&self) -> Option<f64> {
        self.out_rates.iter().copied().reduce(f64::min)
    }

    #[inline]
    pub fn self_rate(&self, i: usize) -> f64 {
        self.self_rates[i]
    }

    #[inline]
    pub fn recovery_rate(&self, i: usize) -> f64 {
        self.recovery_rates[i]
    }

    pub fn self_rates(&self) -> &[f64] {
        &self.self_rates
    }

    pub fn recovery_rates(&self) -> &[f64] {
        &self.recovery_rates
    }

    pub fn has_self_activation(&self) -> bool {
        self.self_rates.iter().any(|&b| b > 0.0)
    }

    pub fn has_recovery(&self) -> bool {
        self.recovery_rates.iter().any(|&g| g > 0.0)
    }

    fn check_universe(&self, set: &NodeSet) -> Result<()> {
        if set.universe() != self.node_count {
            return Err(Error::Domain(format!(
                "node set over {} ids used with a {}-node network",
                set.universe(),
                self.node_count
            )));
        }
        Ok(())
    }

    /// Total rate from the active set `U` into its inactive out-neighbours,
    /// `sum over i in U, j in N_out(i) \ U of alpha_ij`.
    pub fn frontier_rate(&self, active: &NodeSet) -> Result<f64> {
        self.check_universe(active)?;
        let mut total = 0.0;
        for i in active.iter() {
            for (j, a) in self.out_edges(i) {
                if !active.contains(j) {
                    total += a;
                }
            }
        }
        Ok(total)
    }

    /// Rate at which the nodes of `active` push node `j`: `sum over i in U of alpha_ij`.
    pub fn incoming_rate(&self, j: usize, active: &NodeSet) -> f64 {
        self.in_edges(j)
            .filter(|&(i, _)| active.contains(i))
            .map(|(_, a)| a)
            .sum()
    }

    /// `sum over i in U of beta_i`.
    pub fn aggregate_self_rate(&self, set: &NodeSet) -> Result<f64> {
        self.check_universe(set)?;
        Ok(set.iter().map(|i| self.self_rates[i]).sum())
    }

    /// `sum over i in U of gamma_i`.
    pub fn aggregate_recovery_rate(&self, set: &NodeSet) -> Result<f64> {
        self.check_universe(set)?;
        Ok(set.iter().map(|i| self.recovery_rates[i]).sum())
    }

    /// Multi-source shortest distances on edge weights `1/alpha_ij`.
    ///
    /// Sources sit at distance 0. When self-activation is present a virtual
    /// super-source reaches every node `i` with `beta_i > 0` at distance
    /// `1/beta_i`. Unreachable nodes get `f64::INFINITY`.
    pub fn shortest_activation_distances(&self, sources: &NodeSet) -> Result<Vec<f64>> {
        self.check_universe(sources)?;
        if sources.is_empty() && !self.has_self_activation() {
            return Err(Error::Precondition(
                "empty source set without self-activation: nothing can propagate".into(),
            ));
        }
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut heap = BinaryHeap::new();
        for (i, &b) in self.self_rates.iter().enumerate() {
            if b > 0.0 {
                dist[i] = 1.0 / b;
            }
        }
        for i in sources.iter() {
            dist[i] = 0.0;
        }
        for (i, &d) in dist.iter().enumerate() {
            if d.is_finite() {
                heap.push(HeapEntry { dist: d, node: i });
            }
        }
        while let Some(HeapEntry { dist: d, node: i }) = heap.pop() {
            if d > dist[i] {
                continue;
            }
            for (j, a) in self.out_edges(i) {
                let cand = d + 1.0 / a;
                if cand < dist[j] {
                    dist[j] = cand;
                    heap.push(HeapEntry { dist: cand, node: j });
                }
            }
        }
        Ok(dist)
    }

    /// Nodes sorted by ascending activation distance from `sources`.
    pub fn activation_order(&self, sources: &NodeSet) -> Result<Vec<usize>> {
        let dist = self.shortest_activation_distances(sources)?;
        Ok(ascending_activation_order(&dist))
    }
}

/// Sorts node ids by distance, ties broken by ascending id; infinite
/// distances come last.
pub fn ascending_activation_order(distances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    order
}

#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // Reversed so BinaryHeap pops the smallest distance first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> PropagationNetwork {
        PropagationNetwork::from_edges(3, [(0, 1, 0.5), (1, 2, 0.5)]).unwrap()
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(
            PropagationNetwork::from_edges(0, []),
            Err(Error::Domain(_))
        ));
        assert!(PropagationNetwork::from_edges(2, [(0, 0, 1.0)]).is_err());
        assert!(PropagationNetwork::from_edges(2, [(0, 2, 1.0)]).is_err());
        assert!(PropagationNetwork::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(PropagationNetwork::from_edges(2, [(0, 1, f64::NAN)]).is_err());
        assert!(PropagationNetwork::from_edges(2, [(0, 1, 1.0), (0, 1, 2.0)]).is_err());
    }

    #[test]
    fn transpose_matches() {
        let net =
            PropagationNetwork::from_edges(4, [(2, 0, 0.3), (0, 1, 0.5), (3, 0, 0.1), (0, 3, 0.9)])
                .unwrap();
        let mut fwd: Vec<_> = net.edges().collect();
        let mut bwd: Vec<_> = (0..4)
            .flat_map(|j| net.in_edges(j).map(move |(i, a)| (i, j, a)).collect::<Vec<_>>())
            .collect();
        fwd.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bwd.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(fwd, bwd);
        assert_eq!(net.rate(0, 3), 0.9);
        assert_eq!(net.rate(3, 2), 0.0);
    }

    #[test]
    fn frontier_rate_examples() {
        let net = PropagationNetwork::from_edges(2, [(0, 1, 0.5)]).unwrap();
        let u = NodeSet::from_ids(2, [0]).unwrap();
        assert_eq!(net.frontier_rate(&u).unwrap(), 0.5);
        assert_eq!(net.frontier_rate(&NodeSet::full(2)).unwrap(), 0.0);
        assert!(matches!(
            net.frontier_rate(&NodeSet::empty(3)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn aggregate_rates() {
        let net = PropagationNetwork::from_edges(3, [])
            .unwrap()
            .with_self_rates(vec![0.1, 0.2, 0.3])
            .unwrap();
        let u = NodeSet::from_ids(3, [0, 2]).unwrap();
        assert!((net.aggregate_self_rate(&u).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(net.aggregate_self_rate(&NodeSet::empty(3)).unwrap(), 0.0);
        assert_eq!(net.aggregate_recovery_rate(&u).unwrap(), 0.0);
        assert!(net.clone().with_self_rates(vec![0.1]).is_err());
        assert!(net.with_recovery_rates(vec![0.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn distances_on_path_and_isolated() {
        let net = path3();
        let s = NodeSet::from_ids(3, [0]).unwrap();
        assert_eq!(net.shortest_activation_distances(&s).unwrap(), vec![0.0, 2.0, 4.0]);
        assert_eq!(net.activation_order(&s).unwrap(), vec![0, 1, 2]);

        let lonely = PropagationNetwork::from_edges(3, []).unwrap();
        let d = lonely.shortest_activation_distances(&s).unwrap();
        assert_eq!(d[0], 0.0);
        assert!(d[1].is_infinite() && d[2].is_infinite());
    }

    #[test]
    fn empty_sources_need_self_activation() {
        let net = path3();
        assert!(matches!(
            net.shortest_activation_distances(&NodeSet::empty(3)),
            Err(Error::Precondition(_))
        ));
        let net = net.with_self_rates(vec![0.0, 0.0, 0.25]).unwrap();
        let d = net.shortest_activation_distances(&NodeSet::empty(3)).unwrap();
        assert!(d[0].is_infinite() && d[1].is_infinite());
        assert_eq!(d[2], 4.0);
    }

    #[test]
    fn ties_broken_by_id() {
        let net = PropagationNetwork::from_edges(8, [(3, 0, 1.0), (7, 1, 1.0)]).unwrap();
        let s = NodeSet::from_ids(8, [7, 3]).unwrap();
        let order = net.activation_order(&s).unwrap();
        assert_eq!(&order[..4], &[3, 7, 0, 1]);
        assert_eq!(&order[4..], &[2, 4, 5, 6]);
    }
}
