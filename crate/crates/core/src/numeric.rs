//! Derivative-free minimization, parameter sweeps, and bisection.
//!
//! The physical quantities optimized here (pump duration, phase-matching
//! width, fiber length) span many decades, so every search works on the
//! log-transformed coordinate.

use crate::error::{Error, Result};
use crate::temporal::{tau_heralded, SourceParams};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Bracket and stopping rule for a scalar search.
#[derive(Debug, Clone, Copy)]
pub struct ScalarSearchSpec {
    /// Lower end of the bracket (> 0; searches run in log space).
    pub lo: f64,
    /// Upper end of the bracket.
    pub hi: f64,
    /// Relative tolerance on the argmin.
    pub rel_tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
}

impl ScalarSearchSpec {
    pub fn new(lo: f64, hi: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be in (0, 1), got {rel_tol}"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(Self {
            lo,
            hi,
            rel_tol,
            max_iter,
        })
    }
}

/// Which end of the bracket a search ended on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryHit {
    Lower,
    Upper,
}

/// Result of a scalar minimization.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMinimum {
    pub x: f64,
    pub value: f64,
    /// Set when the minimum sits at a bracket end (the function is monotone
    /// over the bracket as far as the search can tell).
    pub boundary: Option<BoundaryHit>,
}

/// Golden-section minimum of `f` on `[lo, hi]`, search in log(x).
///
/// For a unimodal `f` the result satisfies `|x - argmin| <= rel_tol * x`.
/// Monotone functions converge to a bracket end, reported via `boundary`.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, spec: &ScalarSearchSpec) -> Result<ScalarMinimum> {
    let g = |u: f64| f(u.exp());
    let mut a = spec.lo.ln();
    let mut b = spec.hi.ln();
    let (full_a, full_b) = (a, b);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;

    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    if !f1.is_finite() || !f2.is_finite() {
        return Err(Error::InvalidParameter(
            "objective is not finite on the bracket".into(),
        ));
    }

    let mut iters = 0;
    while (b - a) > spec.rel_tol {
        if iters >= spec.max_iter {
            let (bx, bf) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
            return Err(Error::NoConvergence {
                iterations: iters,
                best_x: bx.exp(),
                best_value: bf,
            });
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        }
        iters += 1;
    }

    let (u, v) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    // Compare against the bracket ends: a monotone objective drifts into a
    // corner and the end point itself may be the true minimum.
    let (ulo, flo) = (full_a, g(full_a));
    let (uhi, fhi) = (full_b, g(full_b));
    let (best_u, best_f) = [(u, v), (ulo, flo), (uhi, fhi)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();

    let boundary = if best_u - full_a <= 2.0 * spec.rel_tol {
        Some(BoundaryHit::Lower)
    } else if full_b - best_u <= 2.0 * spec.rel_tol {
        Some(BoundaryHit::Upper)
    } else {
        None
    };
    Ok(ScalarMinimum {
        x: best_u.exp(),
        value: best_f,
        boundary,
    })
}

/// Result of the 2-D source optimization.
#[derive(Debug, Clone, Copy)]
pub struct Optimum2d {
    pub tau_p: f64,
    pub sigma: f64,
    pub value: f64,
    /// True when the optimum sits at the edge of the search domain.
    pub boundary_hit: bool,
}

/// Search domain for the 2-D source optimization.
const TAU_P_RANGE: (f64, f64) = (1e-15, 1e-6);
const SIGMA_RANGE: (f64, f64) = (1e8, 1e14);

/// Minimize an objective over (pump duration, phase-matching width).
///
/// Coarse 96x96 log-grid scan over tau_p in [1e-15, 1e-6] s and sigma in
/// [1e8, 1e14] s^-1, then coordinate descent with [`minimize_scalar`] on each
/// coordinate until the joint relative change drops below 1e-8.
pub fn full_optimum_2d_of<F: Fn(f64, f64) -> f64 + Sync>(objective: F) -> Result<Optimum2d> {
    const N: usize = 96;
    let grid = |range: (f64, f64), i: usize| -> f64 {
        let (lo, hi) = (range.0.ln(), range.1.ln());
        (lo + (hi - lo) * i as f64 / (N - 1) as f64).exp()
    };

    let cells: Vec<(usize, usize)> = (0..N).flat_map(|i| (0..N).map(move |j| (i, j))).collect();
    let evaluated: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| objective(grid(TAU_P_RANGE, i), grid(SIGMA_RANGE, j)))
        .collect();
    let (best_idx, coarse_min) = evaluated
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if !coarse_min.is_finite() {
        return Err(Error::InvalidParameter(
            "objective is not finite anywhere on the coarse grid".into(),
        ));
    }
    let (bi, bj) = cells[best_idx];
    let mut tau_p = grid(TAU_P_RANGE, bi);
    let mut sigma = grid(SIGMA_RANGE, bj);
    let mut value = coarse_min;

    let tol = 1e-8;
    let spec_tau = ScalarSearchSpec::new(TAU_P_RANGE.0, TAU_P_RANGE.1, 1e-10, 400)?;
    let spec_sigma = ScalarSearchSpec::new(SIGMA_RANGE.0, SIGMA_RANGE.1, 1e-10, 400)?;
    let mut boundary_hit = false;
    for _ in 0..80 {
        let s = sigma;
        let along_tau = minimize_scalar(|tp| objective(tp, s), &spec_tau)?;
        let t = along_tau.x;
        let along_sigma = minimize_scalar(|sg| objective(t, sg), &spec_sigma)?;

        let d_tau = (along_tau.x / tau_p - 1.0).abs();
        let d_sigma = (along_sigma.x / sigma - 1.0).abs();
        let d_val = if value != 0.0 {
            (along_sigma.value / value - 1.0).abs()
        } else {
            0.0
        };
        tau_p = along_tau.x;
        sigma = along_sigma.x;
        value = along_sigma.value;
        boundary_hit = along_tau.boundary.is_some() || along_sigma.boundary.is_some();
        if d_tau < tol && d_sigma < tol && d_val < tol {
            break;
        }
    }
    if value > coarse_min * (1.0 + 1e-12) {
        return Err(Error::Inconsistency(format!(
            "refinement ({value}) ended above the coarse-grid minimum ({coarse_min})"
        )));
    }
    Ok(Optimum2d {
        tau_p,
        sigma,
        value,
        boundary_hit,
    })
}

/// Minimize the heralded temporal width over both source parameters.
pub fn full_optimum_2d(d_a: f64, d_b: f64) -> Result<Optimum2d> {
    if d_a == 0.0 && d_b == 0.0 {
        return Err(Error::ZeroDispersion(
            "2-D optimum degenerates without dispersion (width is monotone in tau_p)",
        ));
    }
    full_optimum_2d_of(|tau_p, sigma| {
        let src = SourceParams { tau_p, sigma };
        tau_heralded(&src, d_a, d_b)
    })
}

/// One axis of a sweep: name, display unit, grid values.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(format!("axis {name} is empty")));
        }
        let monotone =
            values.windows(2).all(|w| w[0] < w[1]) || values.windows(2).all(|w| w[0] > w[1]);
        if !(monotone || values.len() == 1) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "axis {name} must be strictly monotone and finite"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            unit: unit.to_string(),
            values,
        })
    }

    /// Log-spaced grid, inclusive of both ends.
    pub fn log_spaced(name: &str, unit: &str, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(Error::InvalidParameter(format!(
                "log axis {name} needs 0 < lo < hi and n >= 2"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let values = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect();
        Self::new(name, unit, values)
    }

    /// Linearly spaced grid, inclusive of both ends.
    pub fn lin_spaced(name: &str, unit: &str, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo && n >= 2) {
            return Err(Error::InvalidParameter(format!(
                "linear axis {name} needs lo < hi and n >= 2"
            )));
        }
        let values = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        Self::new(name, unit, values)
    }
}

/// Dense evaluation of a function over a Cartesian grid.
///
/// `values` is row-major in axis declaration order and is bit-identical
/// across runs and thread counts. Cells where the objective returned a
/// non-finite value are listed in `failures`.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    pub values: Vec<f64>,
    pub failures: Vec<usize>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid coordinates of a flat row-major index.
    pub fn coords(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = ax.values[idx % ax.values.len()];
            idx /= ax.values.len();
        }
        out
    }
}

/// Evaluate `f` on the full Cartesian grid of `axes`.
pub fn sweep<F>(
    f: F,
    axes: Vec<SweepAxis>,
    metadata: BTreeMap<String, String>,
) -> Result<SweepResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if axes.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one axis".into(),
        ));
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = flat;
            let mut point = vec![0.0; axes.len()];
            for (k, ax) in axes.iter().enumerate().rev() {
                point[k] = ax.values[idx % ax.values.len()];
                idx /= ax.values.len();
            }
            f(&point)
        })
        .collect();
    let failures = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(i, _)| i)
        .collect();
    Ok(SweepResult {
        axes,
        values,
        failures,
        metadata,
    })
}

/// Standard bisection for a sign change of `g` on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket, whose width is at most `tol`.
pub fn bisect_zero_crossing<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bisection needs lo < hi and tol > 0, got [{lo}, {hi}], tol {tol}"
        )));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = g(a);
    let fb = g(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::SameSignBracket { lo, hi });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // bracket exhausted in floating point
        }
        let fm = g(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
