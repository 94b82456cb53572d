//! Uniformization for `v exp(tA)` with a generator `A` of a finite chain.

use crate::error::{Error, Result};

/// Largest `lambda * tau` handled in one substep; keeps the Poisson weights
/// well inside floating-point range.
const MAX_SUBSTEP_MASS: f64 = 10.0;

/// Replaces `v` by `v exp(tA)`.
///
/// `lambda` must bound every exit rate of `A`; `apply(x, out)` must write
/// `x (I + A / lambda)`. The Poisson series of each substep is cut once its
/// remaining weight falls below `tol / substeps`, so total mass is lost by
/// at most `tol`.
pub(crate) fn propagate<F>(v: &mut [f64], t: f64, lambda: f64, tol: f64, mut apply: F) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if t == 0.0 || lambda <= 0.0 {
        return Ok(());
    }
    let total = lambda * t;
    let substeps = (total / MAX_SUBSTEP_MASS).ceil().max(1.0);
    if substeps > 1e9 {
        return Err(Error::Resource(format!(
            "uniformization would need {substeps:.0} substeps"
        )));
    }
    let substeps = substeps as usize;
    let mass = total / substeps as f64;
    let tol_sub = tol / substeps as f64;
    let n = v.len();
    let mut term = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    for _ in 0..substeps {
        term.copy_from_slice(v);
        let mut w = (-mass).exp();
        let mut cum = w;
        for (a, &x) in acc.iter_mut().zip(term.iter()) {
            *a = w * x;
        }
        let mut i = 0usize;
        while 1.0 - cum > tol_sub {
            i += 1;
            apply(&term, &mut next);
            std::mem::swap(&mut term, &mut next);
            w *= mass / i as f64;
            cum += w;
            for (a, &x) in acc.iter_mut().zip(term.iter()) {
                *a += w * x;
            }
            if i > 10_000 {
                return Err(Error::Numerical("uniformization series did not converge".into()));
            }
        }
        v.copy_from_slice(&acc);
    }
    Ok(())
}
