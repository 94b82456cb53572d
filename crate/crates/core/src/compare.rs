//! Error metrics between two influence curves.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpe::InfluenceCurve;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparePoint {
    pub time: f64,
    pub predicted: f64,
    pub reference: f64,
    /// `|predicted - reference| / reference`, `None` where the reference is zero.
    pub relative: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub max_relative: f64,
    pub mean_relative: f64,
    pub max_absolute: f64,
    pub series: Vec<ComparePoint>,
}

/// Linear interpolation of `(xs, ys)` at `x`; `xs` nondecreasing, values
/// outside its range are clamped to the end points.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let hi = xs.partition_point(|&v| v < x);
    if hi == 0 {
        return ys[0];
    }
    if hi == xs.len() {
        return ys[xs.len() - 1];
    }
    if xs[hi] == x {
        return ys[hi];
    }
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}

/// Relative errors of `predicted` against `reference`, evaluated at the
/// reference times inside the predicted range (interpolating `predicted`
/// linearly when the grids differ).
pub fn compare_curves(predicted: &InfluenceCurve, reference: &InfluenceCurve) -> Result<Comparison> {
    predicted.validate()?;
    reference.validate()?;
    if predicted.node_count() != reference.node_count() {
        return Err(Error::Precondition(format!(
            "curves describe different networks ({} vs {} nodes)",
            predicted.node_count(),
            reference.node_count()
        )));
    }
    let (lo, hi) = (predicted.times[0], *predicted.times.last().expect("nonempty"));
    let series: Vec<ComparePoint> = reference
        .times
        .iter()
        .zip(&reference.sigma)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&time, &r)| {
            let p = interpolate(&predicted.times, &predicted.sigma, time);
            ComparePoint {
                time,
                predicted: p,
                reference: r,
                relative: (r > 0.0).then(|| (p - r).abs() / r),
            }
        })
        .collect();
    if series.is_empty() {
        return Err(Error::Precondition("curves have disjoint time ranges".into()));
    }
    let rel: Vec<f64> = series.iter().filter_map(|p| p.relative).collect();
    Ok(Comparison {
        max_relative: rel.iter().copied().fold(0.0, f64::max),
        mean_relative: if rel.is_empty() { 0.0 } else { rel.iter().sum::<f64>() / rel.len() as f64 },
        max_absolute: series
            .iter()
            .map(|p| (p.predicted - p.reference).abs())
            .fold(0.0, f64::max),
        series,
    })
}
