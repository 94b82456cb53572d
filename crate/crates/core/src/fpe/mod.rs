//! Forward-equation estimates of the active-count distribution.
//!
//! The network process is lumped into a birth-death chain on the number of
//! active nodes. Its rates come from [`rates_dist`] or [`rates_tree`] (or
//! from exact or empirical sources), and the chain is solved with
//! [`solve_rk4`], [`solve_expm`] or [`solve_closed_form`].

mod curve;
mod generator;
mod io;
mod predict;
mod rates;
mod solve;

pub use curve::{read_curve, write_curve, InfluenceCurve, Provenance};
pub use generator::{build_generator, Tridiagonal};
pub use io::{read_rate_profile, write_rate_profile, write_rate_series};
pub use predict::{default_step, predict, Method, Prediction, Solver};
pub use rates::{rates_dist, rates_tree, RateProfile, RateSeries, TreeEstimate, TreeLayer, TreeWidth};
pub use solve::{initial_state, solve_closed_form, solve_expm, solve_expm_grid, solve_rk4};

/// Distribution of the active count over `0..=K` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDistribution {
    pub time: f64,
    pub rho: Vec<f64>,
}

impl StateDistribution {
    pub fn node_count(&self) -> usize {
        self.rho.len() - 1
    }

    /// Expected number of active nodes.
    pub fn influence(&self) -> f64 {
        influence(&self.rho)
    }
}

/// `sigma = sum_k k rho_k`.
pub fn influence(rho: &[f64]) -> f64 {
    rho.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}
