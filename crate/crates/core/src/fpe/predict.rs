use super::{
    initial_state, rates_dist, rates_tree, solve_expm_grid, solve_rk4, InfluenceCurve, Provenance, RateProfile,
    StateDistribution, TreeLayer, TreeWidth,
};
use crate::error::{Error, Result};
use crate::graph::{NodeSet, PropagationNetwork};

/// Rate estimator used by [`predict`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Method {
    Dist,
    Tree(TreeWidth),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Solver {
    /// Uniformization for constant profiles, RK4 otherwise.
    Auto,
    /// RK4 with the given step, or `0.1 / max_k (q_k + r_k)` when `None`.
    Rk4 { step: Option<f64> },
    Expm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub curve: InfluenceCurve,
    pub densities: Vec<StateDistribution>,
    pub rates: RateProfile,
    /// Per-layer diagnostics of the tree search.
    pub tree_layers: Option<Vec<TreeLayer>>,
}

/// Default RK4 step: keeps `h * max_k (q_k + r_k)` at 0.1.
pub fn default_step(rates: &RateProfile, grid: &[f64]) -> f64 {
    let rate = rates.max_exit_rate();
    if rate > 0.0 {
        0.1 / rate
    } else {
        grid.last().copied().filter(|t| *t > 0.0).unwrap_or(1.0)
    }
}

/// Estimates rates from the network and solves the lumped equation on `grid`.
pub fn predict(
    net: &PropagationNetwork,
    sources: &NodeSet,
    grid: &[f64],
    method: &Method,
    solver: Solver,
) -> Result<Prediction> {
    if sources.universe() != net.node_count() {
        return Err(Error::Domain("source set does not match the network".into()));
    }
    let k = net.node_count();
    let (rates, tree_layers, mut provenance) = match method {
        Method::Dist => (rates_dist(net, sources)?, None, Provenance::new("fpe-dist", k)),
        Method::Tree(width) => {
            let est = rates_tree(net, sources, width)?;
            let p = Provenance {
                tree_width: Some(width.at(sources.len())),
                ..Provenance::new("fpe-tree", k)
            };
            (est.profile, Some(est.layers), p)
        }
    };
    let rho0 = initial_state(k, sources.len())?;
    let densities = match solver {
        Solver::Expm => solve_expm_grid(&rates, &rho0, grid)?,
        Solver::Auto if rates.is_constant() => {
            provenance.solver = Some("expm".into());
            solve_expm_grid(&rates, &rho0, grid)?
        }
        Solver::Rk4 { step } => {
            let h = step.unwrap_or_else(|| default_step(&rates, grid));
            provenance.step = Some(h);
            solve_rk4(&rates, &rho0, grid, h)?
        }
        Solver::Auto => {
            let h = default_step(&rates, grid);
            provenance.step = Some(h);
            solve_rk4(&rates, &rho0, grid, h)?
        }
    };
    if provenance.solver.is_none() {
        provenance.solver = Some(if provenance.step.is_some() { "rk4" } else { "expm" }.into());
    }
    let curve = InfluenceCurve {
        times: grid.to_vec(),
        sigma: densities.iter().map(StateDistribution::influence).collect(),
        provenance,
    };
    Ok(Prediction {
        curve,
        densities,
        rates,
        tree_layers,
    })
}
