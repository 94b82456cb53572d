use rayon::prelude::*;

use super::{check_preconditions, simulate_cascade, with_pool, Cascade, EventKind};
use crate::error::{Error, Result};
use crate::fpe::{InfluenceCurve, Provenance, RateSeries};
use crate::graph::{NodeSet, PropagationNetwork};
use crate::rng::stream_rng;

/// Ensemble frequencies of the active count on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDensity {
    pub times: Vec<f64>,
    /// `rho[m][k]`: fraction of cascades with exactly `k` active nodes at `times[m]`.
    pub rho: Vec<Vec<f64>>,
    pub cascades: usize,
}

impl EmpiricalDensity {
    fn from_counts(times: Vec<f64>, counts: Vec<Vec<u64>>, cascades: usize) -> Self {
        let n = cascades as f64;
        let rho = counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / n).collect())
            .collect();
        EmpiricalDensity {
            times,
            rho,
            cascades,
        }
    }

    pub fn node_count(&self) -> usize {
        self.rho.first().map_or(0, |r| r.len() - 1)
    }

    /// `sigma(t) = sum_k k rho_k(t)` at every grid time.
    pub fn influence(&self) -> Vec<f64> {
        self.rho
            .iter()
            .map(|row| row.iter().enumerate().map(|(k, p)| k as f64 * p).sum())
            .collect()
    }
}

fn check_grid(grid: &[f64], horizon: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("time grid must be nondecreasing".into()));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > horizon {
        return Err(Error::Precondition(format!(
            "time grid must lie within [0, {horizon}]"
        )));
    }
    Ok(())
}

fn accumulate(cascade: &Cascade, grid: &[f64], counts: &mut [Vec<u64>]) {
    let mut events = cascade.events.iter().peekable();
    let mut active: isize = 0;
    for (m, &t) in grid.iter().enumerate() {
        while let Some(e) = events.next_if(|e| e.time <= t) {
            active += match e.kind {
                EventKind::Activate => 1,
                EventKind::Recover => -1,
            };
        }
        counts[m][active as usize] += 1;
    }
}

pub fn empirical_density(cascades: &[Cascade], grid: &[f64]) -> Result<EmpiricalDensity> {
    let first = cascades
        .first()
        .ok_or_else(|| Error::Precondition("empty ensemble".into()))?;
    let k = first.node_count;
    let horizon = cascades.iter().map(|c| c.horizon).fold(f64::INFINITY, f64::min);
    check_grid(grid, horizon)?;
    if cascades.iter().any(|c| c.node_count != k) {
        return Err(Error::Precondition("cascades come from networks of different sizes".into()));
    }
    let mut counts = vec![vec![0u64; k + 1]; grid.len()];
    for c in cascades {
        accumulate(c, grid, &mut counts);
    }
    Ok(EmpiricalDensity::from_counts(grid.to_vec(), counts, cascades.len()))
}

/// Simulates and bins `n` cascades without keeping them in memory.
///
/// Equal to `empirical_density(&run_ensemble(..), grid)` for the same seed.
pub fn ensemble_density(
    net: &PropagationNetwork,
    sources: &NodeSet,
    horizon: f64,
    n: usize,
    seed: u64,
    workers: usize,
    grid: &[f64],
) -> Result<EmpiricalDensity> {
    check_preconditions(net, sources, horizon)?;
    check_grid(grid, horizon)?;
    if n == 0 {
        return Err(Error::Precondition("ensemble size must be at least 1".into()));
    }
    let k = net.node_count();
    let zero = || vec![vec![0u64; k + 1]; grid.len()];
    let counts = with_pool(workers, || {
        (0..n)
            .into_par_iter()
            .try_fold(zero, |mut acc, r| {
                let c = simulate_cascade(net, sources, horizon, &mut stream_rng(seed, r as u64))?;
                accumulate(&c, grid, &mut acc);
                Ok::<_, Error>(acc)
            })
            .try_reduce(zero, |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                Ok(a)
            })
    })??;
    Ok(EmpiricalDensity::from_counts(grid.to_vec(), counts, n))
}

pub fn empirical_influence(cascades: &[Cascade], grid: &[f64]) -> Result<InfluenceCurve> {
    let density = empirical_density(cascades, grid)?;
    Ok(InfluenceCurve {
        times: density.times.clone(),
        sigma: density.influence(),
        provenance: Provenance::monte_carlo(density.node_count(), density.cascades, None),
    })
}

/// Transition rates recovered from a density by finite differences of the
/// cumulative mass, `q_k(t) = -(sum_{j<=k} rho_j)'(t) / rho_k(t)`.
///
/// Interior points use central differences, the two ends second-order
/// one-sided ones. Cells with `rho_k(t) < 10 / n` are left undefined.
pub fn empirical_rates(density: &EmpiricalDensity) -> Result<RateSeries> {
    let times = &density.times;
    let m = times.len();
    if m < 3 {
        return Err(Error::Precondition("finite differences need at least 3 grid points".into()));
    }
    let h = (times[m - 1] - times[0]) / (m - 1) as f64;
    let uniform = h > 0.0
        && times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
    if !uniform {
        return Err(Error::Precondition("empirical rates need a uniform time grid".into()));
    }
    let k_max = density.node_count();
    let floor = 10.0 / density.cascades as f64;
    let cumulative: Vec<Vec<f64>> = density
        .rho
        .iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let derivative = |mi: usize, k: usize| -> f64 {
        let c = |i: usize| cumulative[i][k];
        if mi == 0 {
            (-3.0 * c(0) + 4.0 * c(1) - c(2)) / (2.0 * h)
        } else if mi == m - 1 {
            (3.0 * c(m - 1) - 4.0 * c(m - 2) + c(m - 3)) / (2.0 * h)
        } else {
            (c(mi + 1) - c(mi - 1)) / (2.0 * h)
        }
    };
    let q = (0..m)
        .map(|mi| {
            (0..k_max)
                .map(|k| {
                    let rho = density.rho[mi][k];
                    (rho >= floor).then(|| -derivative(mi, k) / rho)
                })
                .collect()
        })
        .collect();
    Ok(RateSeries {
        times: times.clone(),
        q,
        r: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Event;

    fn act(time: f64, node: u32) -> Event {
        Event {
            time,
            node,
            kind: EventKind::Activate,
        }
    }

    fn toy() -> Vec<Cascade> {
        let c = |events: Vec<Event>| Cascade {
            node_count: 3,
            sources: vec![0],
            horizon: 3.0,
            events,
        };
        vec![
            c(vec![act(0.0, 0), act(0.5, 1), act(2.5, 2)]),
            c(vec![act(0.0, 0), act(1.0, 2)]),
            c(vec![act(0.0, 0)]),
        ]
    }

    #[test]
    fn toy_ensemble_matches_hand_count() {
        let d = empirical_density(&toy(), &[0.0, 1.0, 3.0]).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(d.rho[0], vec![0.0, 1.0, 0.0, 0.0]);
        // at t = 1: counts 2, 2 (event at exactly t included), 1
        assert_eq!(d.rho[1], vec![0.0, third, 2.0 * third, 0.0]);
        assert_eq!(d.rho[2], vec![0.0, third, third, third]);
        let sigma = d.influence();
        assert_eq!(sigma[0], 1.0);
        assert!((sigma[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn density_errors() {
        assert!(empirical_density(&[], &[0.0]).is_err());
        assert!(empirical_density(&toy(), &[0.0, 4.0]).is_err());
        assert!(empirical_density(&toy(), &[1.0, 0.5]).is_err());
    }

    #[test]
    fn constant_density_has_zero_rates() {
        let d = EmpiricalDensity {
            times: vec![0.0, 0.5, 1.0, 1.5],
            rho: vec![vec![0.25, 0.75]; 4],
            cascades: 1000,
        };
        let r = empirical_rates(&d).unwrap();
        for row in &r.q {
            assert_eq!(row[0], Some(0.0));
        }
    }

    #[test]
    fn rates_need_uniform_grid() {
        let d = EmpiricalDensity {
            times: vec![0.0, 0.5, 1.5],
            rho: vec![vec![0.25, 0.75]; 3],
            cascades: 1000,
        };
        assert!(empirical_rates(&d).is_err());
        let short = EmpiricalDensity {
            times: vec![0.0, 0.5],
            rho: vec![vec![0.25, 0.75]; 2],
            cascades: 1000,
        };
        assert!(empirical_rates(&short).is_err());
    }

    #[test]
    fn birth_chain_rate_recovered_to_second_order() {
        // rho_0(t) = exp(-q t): the finite-difference estimate carries an O(h^2) error
        let q0 = 1.3;
        let err_at = |m: usize| {
            let h = 2.0 / (m - 1) as f64;
            let times: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
            let rho = times
                .iter()
                .map(|&t| {
                    let p = (-q0 * t).exp();
                    vec![p, 1.0 - p]
                })
                .collect();
            let d = EmpiricalDensity {
                times,
                rho,
                cascades: usize::MAX,
            };
            let r = empirical_rates(&d).unwrap();
            r.q.iter()
                .map(|row| (row[0].unwrap() - q0).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err_at(41);
        let fine = err_at(81);
        assert!(coarse < 0.02, "{coarse}");
        assert!(coarse / fine > 3.5, "ratio {}", coarse / fine);
    }
}
