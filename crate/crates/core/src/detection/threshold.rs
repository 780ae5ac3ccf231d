use log::warn;
use serde::{Deserialize, Serialize};

use super::{p_detect, p_false_alarm, BetaRatio};
use crate::error::{PlaError, Result};

/// The open α interval is searched on `[ALPHA_EPS, 1 − ALPHA_EPS]`.
pub const ALPHA_EPS: f64 = 1e-9;
/// Default bracket width at which the golden-section search stops.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Coarse grid used to sanity-check unimodality before the search.
pub const PRESCAN_POINTS: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSection {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`. The best evaluated point is returned.
pub fn golden_section_minimize<F>(f: F, lo: f64, hi: f64, tol: f64) -> GoldenSection
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a >= tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    // the end points are also candidates: the minimum may sit on the boundary
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    GoldenSection {
        x: best.0,
        value: best.1,
        iterations,
    }
}

/// Miss-plus-false-alarm objective `P_f(α,T) + 1 − P_d(α,β,T)`.
pub fn threshold_objective(alpha: f64, beta: f64, slot_length: usize) -> Result<f64> {
    Ok(p_false_alarm(alpha, slot_length)? + (1.0 - p_detect(alpha, beta, slot_length)?))
}

/// Optimal threshold coefficient and the probabilities it attains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptimum {
    pub alpha: f64,
    pub objective: f64,
    pub p_detect: f64,
    pub p_false_alarm: f64,
    /// The coarse pre-scan found a better point than the golden-section run.
    pub prescan_disagreement: bool,
}

pub fn optimize_threshold_default(beta: f64, slot_length: usize) -> Result<ThresholdOptimum> {
    optimize_threshold(beta, slot_length, DEFAULT_TOL)
}

/// Minimizes [`threshold_objective`] over α by golden-section search.
///
/// A 64-point grid is scanned first. If its best point beats the search
/// result by more than `tol`, a warning is logged and the search is repeated
/// inside the grid cell around that point.
pub fn optimize_threshold(beta: f64, slot_length: usize, tol: f64) -> Result<ThresholdOptimum> {
    let beta = BetaRatio::new(beta)?.value();
    if slot_length == 0 {
        return Err(PlaError::arg("slot length must be at least 1"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(PlaError::arg(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let lo = ALPHA_EPS;
    let hi = 1.0 - ALPHA_EPS;
    // arguments are validated above, so the objective cannot fail in [lo, hi]
    let objective = |a: f64| threshold_objective(a, beta, slot_length).unwrap_or(f64::INFINITY);

    let mut best = golden_section_minimize(objective, lo, hi, tol);

    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let (grid_idx, grid_val) = (0..PRESCAN_POINTS)
        .map(|k| (k, objective(lo + k as f64 * step)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let mut disagreement = false;
    if grid_val < best.value - tol {
        disagreement = true;
        warn!(
            "threshold objective looks multimodal (beta={beta}, T={slot_length}): \
             grid {grid_val:.9} < golden {:.9}; refining around the grid minimum",
            best.value
        );
        let a = (lo + (grid_idx as f64 - 1.0) * step).max(lo);
        let b = (lo + (grid_idx as f64 + 1.0) * step).min(hi);
        let local = golden_section_minimize(objective, a, b, tol);
        if local.value < best.value {
            best = local;
        }
    }

    Ok(ThresholdOptimum {
        alpha: best.x,
        objective: best.value,
        p_detect: p_detect(best.x, beta, slot_length)?,
        p_false_alarm: p_false_alarm(best.x, slot_length)?,
        prescan_disagreement: disagreement,
    })
}
