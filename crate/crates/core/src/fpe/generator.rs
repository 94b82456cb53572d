//! Tridiagonal generator of the lumped birth-death chain.

use crate::error::{Error, Result};
use crate::fpe::RateProfile;

/// Generator `A` on states `0..=K` with `A[j][j+1] = q_j`,
/// `A[j][j-1] = r_j` and zero row sums.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    /// `up[j] = q_j`, with `up[K] = 0`.
    pub up: Vec<f64>,
    /// `down[j] = r_j`, with `down[0] = 0`.
    pub down: Vec<f64>,
}

impl Tridiagonal {
    /// Builds the generator from forward rates `q` (length K) and backward
    /// rates `r` (length K, `r[k-1] = r_k`).
    pub fn from_rates(q: &[f64], r: &[f64]) -> Result<Self> {
        let k = q.len();
        if r.len() != k {
            return Err(Error::Domain("q and r must have the same length".into()));
        }
        if let Some(v) = q.iter().chain(r).find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("rates must be finite and nonnegative, found {v}")));
        }
        let mut up = Vec::with_capacity(k + 1);
        up.extend_from_slice(q);
        up.push(0.0);
        let mut down = Vec::with_capacity(k + 1);
        down.push(0.0);
        down.extend_from_slice(r);
        Ok(Tridiagonal { up, down })
    }

    pub fn states(&self) -> usize {
        self.up.len()
    }

    pub fn diagonal(&self, j: usize) -> f64 {
        -(self.up[j] + self.down[j])
    }

    /// `out = x A` for a row vector `x`.
    pub fn apply_left(&self, x: &[f64], out: &mut [f64]) {
        let n = self.states();
        debug_assert!(x.len() == n && out.len() == n);
        for j in 0..n {
            let mut v = -x[j] * (self.up[j] + self.down[j]);
            if j > 0 {
                v += x[j - 1] * self.up[j - 1];
            }
            if j + 1 < n {
                v += x[j + 1] * self.down[j + 1];
            }
            out[j] = v;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.states();
        let mut a = vec![vec![0.0; n]; n];
        for j in 0..n {
            a[j][j] = self.diagonal(j);
            if j + 1 < n {
                a[j][j + 1] = self.up[j];
            }
            if j > 0 {
                a[j][j - 1] = self.down[j];
            }
        }
        a
    }
}

/// Generator of `rates` at time `t`.
pub fn build_generator(rates: &RateProfile, t: f64) -> Result<Tridiagonal> {
    let k = rates.node_count();
    let mut q = vec![0.0; k];
    let mut r = vec![0.0; k];
    rates.rates_at(t, &mut q, &mut r);
    Tridiagonal::from_rates(&q, &r)
}
