//! Solvers for the lumped forward equation `rho' = rho A(t)`.

use rayon::prelude::*;

use super::{RateProfile, StateDistribution, Tridiagonal};
use crate::error::{Error, Result};
use crate::uniform;

/// Entries below this after a step count as a loss of positivity.
const NEGATIVE_TOLERANCE: f64 = -1e-9;
/// Mass tolerance of the uniformization series.
const EXPM_TOLERANCE: f64 = 1e-13;
/// How many times a step may be halved before giving up.
const MAX_HALVINGS: u32 = 40;

const BLOCK: usize = 2048;
/// One extra state per Horner pass on each side of a block.
const HALO: usize = 4;
/// RK4 steps applied to a block before moving on.
const SWEEP: usize = 8;

/// Point mass on state `start` in a chain over `0..=node_count`.
pub fn initial_state(node_count: usize, start: usize) -> Result<Vec<f64>> {
    if start > node_count {
        return Err(Error::Domain(format!(
            "initial state {start} exceeds node count {node_count}"
        )));
    }
    let mut rho = vec![0.0; node_count + 1];
    rho[start] = 1.0;
    Ok(rho)
}

fn check_initial(rates: &RateProfile, rho0: &[f64]) -> Result<()> {
    if rho0.len() != rates.node_count() + 1 {
        return Err(Error::Domain(format!(
            "initial distribution has {} entries, expected {}",
            rho0.len(),
            rates.node_count() + 1
        )));
    }
    if rho0.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Domain("initial distribution must be nonnegative".into()));
    }
    let total: f64 = rho0.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("initial distribution sums to {total}")));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Domain("grid times must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("grid times must be nondecreasing".into()));
    }
    Ok(())
}

/// Clips round-off negatives and rescales to unit mass.
fn normalized(time: f64, rho: &[f64]) -> StateDistribution {
    let mut rho: Vec<f64> = rho.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = rho.iter().sum();
    if total > 0.0 {
        rho.iter_mut().for_each(|p| *p /= total);
    }
    StateDistribution { time, rho }
}

/// Classical RK4 with nominal step `h`, reporting the distribution at each
/// grid time (clipped and renormalized there only).
///
/// A step that drives any entry below `-1e-9` is rejected and retried with
/// half the step. Constant profiles use a cache-blocked, multithreaded
/// kernel; sampled profiles interpolate the rates at the stage times.
pub fn solve_rk4(rates: &RateProfile, rho0: &[f64], grid: &[f64], h: f64) -> Result<Vec<StateDistribution>> {
    check_initial(rates, rho0)?;
    check_grid(grid)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Spec(format!("step size must be positive, got {h}")));
    }
    // advances `count` steps of size `h` from time `t`, returning the
    // smallest entry seen after any of them
    type Stepper<'a> = Box<dyn FnMut(f64, f64, usize, &[f64], &mut [f64]) -> Result<f64> + 'a>;
    let mut stepper: Stepper = if let Some(q) = rates.constant_q() {
        let zeros = vec![0.0; q.len()];
        let gen = Tridiagonal::from_rates(q, rates.constant_r().unwrap_or(&zeros))?;
        Box::new(move |_, h, count, x, out| Ok(horner_steps(&gen, x, out, h, count)))
    } else {
        let mut stages = StageScratch::new(rates.node_count());
        let mut cur = vec![0.0; rho0.len()];
        Box::new(move |t, h, count, x, out| {
            cur.copy_from_slice(x);
            let mut min = f64::INFINITY;
            for i in 0..count {
                min = min.min(stages.step(rates, t + i as f64 * h, h, &cur, out)?);
                cur.copy_from_slice(out);
            }
            Ok(min)
        })
    };

    let mut x = rho0.to_vec();
    let mut y = vec![0.0; x.len()];
    let mut t = 0.0;
    let mut h_cur = h;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        while target > t {
            let remaining = target - t;
            let n = (remaining / h_cur * (1.0 - 1e-12)).ceil().max(1.0);
            let step = remaining / n;
            let count = n.min(SWEEP as f64) as usize;
            let min = stepper(t, step, count, &x, &mut y)?;
            if min < NEGATIVE_TOLERANCE || !min.is_finite() {
                h_cur = step / 2.0;
                if h_cur < h * 0.5f64.powi(MAX_HALVINGS as i32) {
                    let suggest = 0.1 / rates.max_exit_rate().max(f64::MIN_POSITIVE);
                    return Err(Error::Numerical(format!(
                        "RK4 lost positivity at t={t} even with step {h_cur:e}; try h <= {suggest:e}"
                    )));
                }
                continue;
            }
            std::mem::swap(&mut x, &mut y);
            t = if count as f64 == n { target } else { t + step * count as f64 };
        }
        out.push(normalized(target, &x));
    }
    Ok(out)
}

struct StageScratch {
    q: Vec<f64>,
    r: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl StageScratch {
    fn new(node_count: usize) -> Self {
        let n = node_count + 1;
        StageScratch {
            q: vec![0.0; node_count],
            r: vec![0.0; node_count],
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn derivative(&mut self, rates: &RateProfile, t: f64, stage: usize) -> Result<()> {
        rates.rates_at(t, &mut self.q, &mut self.r);
        let gen = Tridiagonal::from_rates(&self.q, &self.r)?;
        gen.apply_left(&self.tmp, &mut self.k[stage]);
        Ok(())
    }

    fn step(&mut self, rates: &RateProfile, t: f64, h: f64, x: &[f64], out: &mut [f64]) -> Result<f64> {
        self.tmp.copy_from_slice(x);
        self.derivative(rates, t, 0)?;
        for (stage, (dt, frac)) in [(0.5, 0.5), (0.5, 0.5), (1.0, 1.0)].into_iter().enumerate() {
            for ((v, &xi), &ki) in self.tmp.iter_mut().zip(x).zip(&self.k[stage]) {
                *v = xi + frac * h * ki;
            }
            self.derivative(rates, t + dt * h, stage + 1)?;
        }
        let mut min = f64::INFINITY;
        for (j, o) in out.iter_mut().enumerate() {
            *o = x[j] + h / 6.0 * (self.k[0][j] + 2.0 * self.k[1][j] + 2.0 * self.k[2][j] + self.k[3][j]);
            min = min.min(*o);
        }
        Ok(min)
    }
}

/// `count` RK4 steps for a constant generator. Each step uses the Horner
/// form `w <- x + c w A` with `c = h/4, h/3, h/2, h`, which equals the
/// classical four-stage scheme for linear autonomous systems. Blocks are
/// advanced through all steps while in cache, with a halo wide enough to
/// keep their interior exact. Returns the smallest entry after any step.
fn horner_steps(gen: &Tridiagonal, x: &[f64], out: &mut [f64], h: f64, count: usize) -> f64 {
    let n = x.len();
    let halo = HALO * count;
    let cap = BLOCK + 2 * halo;
    out.par_chunks_mut(BLOCK)
        .enumerate()
        .map_init(
            || (vec![0.0; cap], vec![0.0; cap], vec![0.0; cap]),
            |(base, w, next), (b, chunk)| {
                let start = b * BLOCK;
                let lo = start.saturating_sub(halo);
                let hi = (start + chunk.len() + halo).min(n);
                let len = hi - lo;
                let (up, down) = (&gen.up[lo..hi], &gen.down[lo..hi]);
                let base = &mut base[..len];
                let (mut w, mut next) = (&mut w[..len], &mut next[..len]);
                w.copy_from_slice(&x[lo..hi]);
                let core = start - lo..start - lo + chunk.len();
                let mut min = f64::INFINITY;
                for _ in 0..count {
                    base.copy_from_slice(w);
                    for c in [h / 4.0, h / 3.0, h / 2.0, h] {
                        horner_pass(base, up, down, w, next, c);
                        std::mem::swap(&mut w, &mut next);
                    }
                    min = w[core.clone()].iter().copied().fold(min, f64::min);
                }
                chunk.copy_from_slice(&w[core]);
                min
            },
        )
        .reduce(|| f64::INFINITY, f64::min)
}

/// `next = x + c w A` on a window; entries whose neighbours fall outside
/// the window are only correct at a true boundary of the chain.
#[inline]
fn horner_pass(x: &[f64], up: &[f64], down: &[f64], w: &[f64], next: &mut [f64], c: f64) {
    let len = x.len();
    let at = |l: usize| {
        let mut v = -w[l] * (up[l] + down[l]);
        if l > 0 {
            v += w[l - 1] * up[l - 1];
        }
        if l + 1 < len {
            v += w[l + 1] * down[l + 1];
        }
        x[l] + c * v
    };
    if len <= 2 {
        for l in 0..len {
            next[l] = at(l);
        }
        return;
    }
    next[0] = at(0);
    next[len - 1] = at(len - 1);
    let m = len - 2;
    let (w0, w1, w2) = (&w[..m], &w[1..m + 1], &w[2..m + 2]);
    let (u0, u1, d1, d2) = (&up[..m], &up[1..m + 1], &down[1..m + 1], &down[2..m + 2]);
    let (x1, n1) = (&x[1..m + 1], &mut next[1..m + 1]);
    for i in 0..m {
        n1[i] = x1[i] + c * (w0[i] * u0[i] - w1[i] * (u1[i] + d1[i]) + w2[i] * d2[i]);
    }
}

/// `rho0 exp(tA)` for a constant profile, by uniformization.
pub fn solve_expm(rates: &RateProfile, rho0: &[f64], t: f64) -> Result<StateDistribution> {
    Ok(solve_expm_grid(rates, rho0, &[t])?.pop().expect("one grid point"))
}

/// [`solve_expm`] at every grid time, propagating between consecutive times.
pub fn solve_expm_grid(rates: &RateProfile, rho0: &[f64], grid: &[f64]) -> Result<Vec<StateDistribution>> {
    check_initial(rates, rho0)?;
    check_grid(grid)?;
    let Some(q) = rates.constant_q() else {
        return Err(Error::Unsupported(
            "matrix exponential needs a time-constant rate profile".into(),
        ));
    };
    let zeros = vec![0.0; q.len()];
    let gen = Tridiagonal::from_rates(q, rates.constant_r().unwrap_or(&zeros))?;
    let lambda = rates.max_exit_rate();
    let mut v = rho0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        uniform::propagate(&mut v, target - t, lambda, EXPM_TOLERANCE, |x, y| {
            gen.apply_left(x, y);
            for (yi, &xi) in y.iter_mut().zip(x) {
                *yi = xi + *yi / lambda;
            }
        })?;
        t = target;
        out.push(StateDistribution {
            time: target,
            rho: v.clone(),
        });
    }
    Ok(out)
}

/// Quadrature weight of sample `i` for `int_0^{m h}` on a uniform grid:
/// composite Simpson, with a 3/8 panel at the end when `m` is odd and the
/// trapezoid rule for a single interval.
fn quadrature_weight(m: usize, i: usize, h: f64) -> f64 {
    match m {
        0 => 0.0,
        1 => h / 2.0,
        _ if m.is_multiple_of(2) => simpson_weight(m, i, h),
        _ => {
            let split = m - 3;
            let mut w = if i <= split { simpson_weight(split, i, h) } else { 0.0 };
            if i >= split {
                w += 3.0 * h / 8.0 * if i == split || i == m { 1.0 } else { 3.0 };
            }
            w
        }
    }
}

fn simpson_weight(m: usize, i: usize, h: f64) -> f64 {
    if m == 0 {
        0.0
    } else if i == 0 || i == m {
        h / 3.0
    } else if i % 2 == 1 {
        4.0 * h / 3.0
    } else {
        2.0 * h / 3.0
    }
}

/// Validation-only solver for pure-birth profiles: evaluates
/// `rho_s(t) = exp(-Phi_s(t))` and
/// `rho_{k+1}(t) = int_0^t q_k(s) rho_k(s) exp(-(Phi_{k+1}(t) - Phi_{k+1}(s))) ds`
/// with `Phi_k(t) = int_0^t q_k`, by quadrature on a uniform grid starting
/// at zero. Costs `O(K M^2)` for `M` grid points; the result is not
/// renormalized.
pub fn solve_closed_form(rates: &RateProfile, start: usize, grid: &[f64]) -> Result<Vec<StateDistribution>> {
    if rates.has_recovery() {
        return Err(Error::Unsupported("closed form covers pure-birth profiles only".into()));
    }
    let k_total = rates.node_count();
    initial_state(k_total, start)?;
    check_grid(grid)?;
    let m_total = grid.len();
    if grid[0] != 0.0 || m_total < 2 {
        return Err(Error::Precondition(
            "closed form needs a uniform grid starting at 0 with at least two points".into(),
        ));
    }
    let h = grid[m_total - 1] / (m_total - 1) as f64;
    let scale = grid[m_total - 1].max(1.0);
    if h <= 0.0 || grid.iter().enumerate().any(|(i, &t)| (t - i as f64 * h).abs() > 1e-9 * scale) {
        return Err(Error::Precondition("closed form needs a uniform time grid".into()));
    }

    // q[m][k] and cumulative Phi[m][k]
    let mut q = vec![vec![0.0; k_total + 1]; m_total];
    let mut r = vec![0.0; k_total];
    for (m, row) in q.iter_mut().enumerate() {
        rates.rates_at(grid[m], &mut row[..k_total], &mut r);
    }
    let phi: Vec<Vec<f64>> = (0..m_total)
        .map(|m| {
            (0..=k_total)
                .map(|k| (0..=m).map(|i| quadrature_weight(m, i, h) * q[i][k]).sum())
                .collect()
        })
        .collect();

    let mut rho = vec![vec![0.0; k_total + 1]; m_total];
    for m in 0..m_total {
        rho[m][start] = (-phi[m][start]).exp();
    }
    let mut g = vec![0.0; m_total];
    for k in start..k_total {
        for i in 0..m_total {
            g[i] = q[i][k] * rho[i][k];
        }
        for m in 1..m_total {
            let target = phi[m][k + 1];
            rho[m][k + 1] = (0..=m)
                .map(|i| quadrature_weight(m, i, h) * g[i] * (phi[i][k + 1] - target).exp())
                .sum();
        }
    }
    Ok(grid
        .iter()
        .zip(rho)
        .map(|(&time, rho)| StateDistribution { time, rho })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_pmf(k: usize, mean: f64) -> f64 {
        (0..k).fold((-mean).exp(), |p, i| p * mean / (i + 1) as f64)
    }

    #[test]
    fn quadrature_weights_integrate_cubics_exactly() {
        let h = 0.3;
        for m in 1..9 {
            let f = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
            let exact = {
                let t = m as f64 * h;
                t + t * t / 2.0 - 2.0 * t * t * t / 3.0 + t.powi(4) / 8.0
            };
            let approx: f64 = (0..=m).map(|i| quadrature_weight(m, i, h) * f(i as f64 * h)).sum();
            if m == 1 {
                continue;
            }
            assert!((approx - exact).abs() < 1e-12, "m={m}: {approx} vs {exact}");
        }
    }

    #[test]
    fn horner_matches_stage_rk4() {
        let rates = RateProfile::constant_with_recovery(vec![2.0, 1.5, 0.7, 0.2], vec![0.3, 0.1, 0.4, 0.9]).unwrap();
        let gen = Tridiagonal::from_rates(rates.constant_q().unwrap(), rates.constant_r().unwrap()).unwrap();
        let x = vec![0.1, 0.2, 0.3, 0.25, 0.15];
        let mut horner = vec![0.0; 5];
        horner_steps(&gen, &x, &mut horner, 0.17, 1);
        let mut staged = vec![0.0; 5];
        StageScratch::new(4).step(&rates, 0.0, 0.17, &x, &mut staged).unwrap();
        for (a, b) in horner.iter().zip(&staged) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn blocked_kernel_matches_across_block_edges() {
        let k = 3 * BLOCK + 17;
        let q: Vec<f64> = (0..k).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
        let r: Vec<f64> = (0..k).map(|i| (i % 5) as f64 * 0.05).collect();
        let gen = Tridiagonal::from_rates(&q, &r).unwrap();
        let rates = RateProfile::constant_with_recovery(q, r).unwrap();
        let x: Vec<f64> = (0..=k).map(|i| ((i * 37) % 101) as f64).collect();
        let mut a = vec![0.0; k + 1];
        horner_steps(&gen, &x, &mut a, 0.05, 1);
        let mut b = vec![0.0; k + 1];
        StageScratch::new(k).step(&rates, 0.0, 0.05, &x, &mut b).unwrap();
        for (i, (u, v)) in a.iter().zip(&b).enumerate() {
            assert!((u - v).abs() < 1e-12 * v.abs().max(1.0), "entry {i}: {u} vs {v}");
        }
    }

    #[test]
    fn constant_rate_birth_is_poisson() {
        let k = 30;
        let rates = RateProfile::constant(vec![1.5; k]).unwrap();
        let rho0 = initial_state(k, 0).unwrap();
        let grid = [0.0, 1.0, 2.0];
        let rk = solve_rk4(&rates, &rho0, &grid, 0.01).unwrap();
        let ex = solve_expm_grid(&rates, &rho0, &grid).unwrap();
        for (a, b) in rk.iter().zip(&ex) {
            for j in 0..10 {
                let want = poisson_pmf(j, 1.5 * a.time);
                assert!((a.rho[j] - want).abs() < 1e-9);
                assert!((b.rho[j] - want).abs() < 1e-12);
            }
        }
        let cf = solve_closed_form(&rates, 0, &(0..=200).map(|i| i as f64 * 0.01).collect::<Vec<_>>()).unwrap();
        let last = cf.last().unwrap();
        for j in 0..10 {
            assert!((last.rho[j] - poisson_pmf(j, 3.0)).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_time_and_zero_rates() {
        let rates = RateProfile::constant(vec![0.0; 3]).unwrap();
        let rho0 = initial_state(3, 1).unwrap();
        let d = solve_expm(&rates, &rho0, 5.0).unwrap();
        assert_eq!(d.rho, rho0);
        let rk = solve_rk4(&rates, &rho0, &[0.0, 5.0], 1.0).unwrap();
        assert_eq!(rk[1].rho, rho0);
    }

    #[test]
    fn rejects_bad_input() {
        let rates = RateProfile::constant(vec![1.0; 3]).unwrap();
        assert!(solve_rk4(&rates, &[1.0, 0.0], &[1.0], 0.1).is_err());
        assert!(solve_rk4(&rates, &[1.0, 0.0, 0.0, 0.0], &[1.0], 0.0).is_err());
        assert!(solve_rk4(&rates, &[1.0, 0.0, 0.0, 0.0], &[2.0, 1.0], 0.1).is_err());
        let sampled = RateProfile::sampled(vec![0.0, 1.0], vec![vec![1.0; 3]; 2], None).unwrap();
        assert!(matches!(
            solve_expm(&sampled, &[1.0, 0.0, 0.0, 0.0], 1.0),
            Err(Error::Unsupported(_))
        ));
        let rec = RateProfile::constant_with_recovery(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(solve_closed_form(&rec, 0, &[0.0, 1.0]), Err(Error::Unsupported(_))));
        assert!(solve_closed_form(&rates, 0, &[0.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn oversized_step_is_halved_until_positive() {
        let rates = RateProfile::constant(vec![50.0; 4]).unwrap();
        let rho0 = initial_state(4, 0).unwrap();
        let rk = solve_rk4(&rates, &rho0, &[1.0], 0.5).unwrap();
        let ex = solve_expm(&rates, &rho0, 1.0).unwrap();
        for (a, b) in rk[0].rho.iter().zip(&ex.rho) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
