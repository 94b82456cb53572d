//! Influence prediction on heterogeneous continuous-time propagation networks.
//!
//! The expected number of active nodes `sigma(t) = sum_k k * rho_k(t)` is
//! obtained by solving a birth-death forward equation over the activation
//! count `k = 0..K`, whose transition rates `q_k` (and `r_k` with recovery)
//! are estimated from the network:
//!
//! * [`graph`]: the network, frontier rates and activation distances,
//! * [`gen`]: reproducible random networks and rate samplers,
//! * [`sim`]: exact event-driven simulation and empirical densities,
//! * [`fpe`]: rate estimators, the tridiagonal generator, ODE solvers and
//!   the end-to-end [`fpe::predict`] pipeline,
//! * [`oracle`]: the exact `2^K`-state chain for small networks and
//!   numerical checks of the rate-error bounds,
//! * [`compare`], [`plot`], [`bench`], [`manifest`]: evaluation plumbing
//!   used by the `influx` binary.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod bench;
pub mod compare;
pub mod error;
pub mod fpe;
pub mod gen;
pub mod graph;
pub mod manifest;
pub mod oracle;
pub mod plot;
pub mod rng;
pub mod sim;
pub mod textio;
mod uniform;

pub use error::{Error, Result};
pub use graph::{NodeSet, PropagationNetwork};
