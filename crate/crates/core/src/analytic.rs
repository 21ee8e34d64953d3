//! Closed-form optima of the temporal widths over the pump duration, and the
//! classification of when such an optimum exists at all.
//!
//! For equal dispersion in both arms everything is explicit: the heralded
//! width has an interior minimum at `tau_p = sqrt(2|D|)` for every
//! phase-matching width, and jointly optimizing both source parameters gives
//! `tau_p = sqrt(2|D|)`, `sigma = sqrt(2/|D|)`. With unequal (negative)
//! dispersions the minimum over the pump duration can disappear: depending on
//! the dispersion ratio and on `sigma`, the width may instead decrease all the
//! way to `tau_p -> 0` or to `tau_p -> infinity`. [`optimal_pump_fixed_crystal`]
//! resolves the three regimes.

use crate::error::{Error, Result};
use crate::temporal::{tau_heralded, SourceParams};

/// `4 sqrt(2) + 5`: dispersion-ratio threshold above which the band of
/// phase-matching widths without an interior pump optimum opens (the width
/// then grows monotonically with the pump duration inside the band).
pub fn ratio_threshold_heavy_heralding() -> f64 {
    4.0 * 2f64.sqrt() + 5.0
}

/// `(4 sqrt(2) - 5) / 7`: dispersion-ratio threshold below which the opposite
/// band opens (the width then decreases monotonically with pump duration).
pub fn ratio_threshold_light_heralding() -> f64 {
    (4.0 * 2f64.sqrt() - 5.0) / 7.0
}

/// How the heralded width behaves as a function of the pump duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpRegime {
    /// A strict interior minimum exists.
    InteriorMinimum,
    /// The width grows monotonically; the infimum is at `tau_p -> 0`.
    InfimumAtZero,
    /// The width decreases monotonically; the infimum is at `tau_p -> inf`.
    InfimumAtInfinity,
}

/// Outcome of the pump optimization at a fixed crystal.
#[derive(Debug, Clone, Copy)]
pub struct PumpOptimum {
    pub regime: PumpRegime,
    /// Optimal pump duration; present only for an interior minimum.
    pub tau_p_star: Option<f64>,
    /// Heralded width at the optimum, or the asymptotic limit value in the
    /// monotone regimes.
    pub tau_ah_at_optimum: f64,
}

/// The two bands of `sigma` inside which no interior pump optimum exists.
///
/// `increasing_band` applies when the heralding arm carries at least
/// `4 sqrt(2) + 5` times the dispersion of the heralded arm: for `sigma`
/// inside it the width is monotone increasing in the pump duration.
/// `decreasing_band` is the mirror case (heralding arm lighter by the same
/// factor); inside it the width is monotone decreasing. A band is `None`
/// when its discriminant is negative, i.e. for dispersion ratios where an
/// interior minimum exists for every `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseBoundaries {
    pub increasing_band: Option<(f64, f64)>,
    pub decreasing_band: Option<(f64, f64)>,
}

fn require_negative_pair(d_a: f64, d_b: f64) -> Result<()> {
    if !(d_a < 0.0 && d_b < 0.0 && d_a.is_finite() && d_b.is_finite()) {
        return Err(Error::OutsideRegime(format!(
            "pump-optimum classification is derived for negative dispersion in both arms, \
             got d_a = {d_a}, d_b = {d_b}"
        )));
    }
    Ok(())
}

/// Pump duration minimizing the unheralded width, and that minimal width.
///
/// Errors for zero dispersion: the unheralded width is then monotone in the
/// pump duration and has no interior minimum.
pub fn tau_a_low(d_a: f64, sigma: f64) -> Result<(f64, f64)> {
    if d_a == 0.0 {
        return Err(Error::ZeroDispersion(
            "unheralded width has no interior pump minimum at zero dispersion",
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite() && d_a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tau_a_low needs finite d_a and sigma > 0, got {d_a}, {sigma}"
        )));
    }
    let tau_p = (2.0 * d_a.abs()).sqrt();
    let width = (2.0 + d_a.abs() * sigma * sigma) / (2.0 * sigma);
    Ok((tau_p, width))
}

/// Minimum of the heralded width over the pump duration in the symmetric
/// case (equal dispersion `d` in both arms), at a fixed `sigma`. The minimum
/// sits at `tau_p = sqrt(2|d|)` independently of `sigma`.
pub fn tau_ah_low_sym(d: f64, sigma: f64) -> Result<f64> {
    if d == 0.0 {
        return Err(Error::ZeroDispersion(
            "heralded width has no interior pump minimum at zero dispersion",
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite() && d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tau_ah_low_sym needs finite d and sigma > 0, got {d}, {sigma}"
        )));
    }
    let ad = d.abs();
    let s2 = sigma * sigma;
    Ok(2.0 * (ad * (4.0 + ad * ad * s2 * s2)).sqrt() / (2.0 + ad * s2))
}

/// Jointly optimal source parameters in the symmetric case.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricOptimum {
    pub tau_p: f64,
    pub sigma: f64,
    pub tau_ah: f64,
}

/// Full optimum of the heralded width over both source parameters for equal
/// accumulated dispersion `d` in the two arms.
pub fn symmetric_full_optimum(d: f64) -> Result<SymmetricOptimum> {
    if d == 0.0 {
        return Err(Error::ZeroDispersion(
            "the joint optimum degenerates at zero dispersion",
        ));
    }
    if !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite dispersion {d}"
        )));
    }
    let ad = d.abs();
    Ok(SymmetricOptimum {
        tau_p: (2.0 * ad).sqrt(),
        sigma: (2.0 / ad).sqrt(),
        tau_ah: (2.0 * ad).sqrt(),
    })
}

/// Evaluate the no-interior-minimum bands of `sigma` for a pair of negative
/// dispersions. See [`CaseBoundaries`].
pub fn case_boundaries(d_a: f64, d_b: f64) -> Result<CaseBoundaries> {
    require_negative_pair(d_a, d_b)?;
    let diff = d_a - d_b;
    let sum = d_a + d_b;

    let band = |disc: f64, denom: f64, sign: f64| -> Option<(f64, f64)> {
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let lo = sign * (diff - root) / denom;
        let hi = sign * (diff + root) / denom;
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        debug_assert!(lo >= -1e-30, "band edges must be non-negative, got {lo}");
        Some((lo.max(0.0).sqrt(), hi.sqrt()))
    };

    // Monotone-increasing band: discriminant uses the heralded arm.
    let increasing = band(diff * diff - 8.0 * d_a * sum, 2.0 * d_a * d_b, 1.0);
    // Monotone-decreasing band: discriminant uses the heralding arm.
    let decreasing = band(diff * diff - 8.0 * d_b * sum, d_b * sum, -1.0);

    Ok(CaseBoundaries {
        increasing_band: increasing,
        decreasing_band: decreasing,
    })
}

/// Pump duration at which the heralded width is minimal, when the interior
/// minimum exists (general negative-dispersion pair).
fn interior_pump_optimum(d_a: f64, d_b: f64, sigma: f64) -> Result<f64> {
    let s2 = sigma * sigma;
    let s4 = s2 * s2;
    let num = 2.0 * (d_a + d_b) - s2 * d_b * (d_a - d_b) + s4 * d_a * d_b * d_b;
    let den = 8.0 + 2.0 * s2 * (d_a - d_b) + s4 * d_b * (d_a + d_b);
    let radicand = -num / den;
    if !(radicand > 0.0 && radicand.is_finite()) {
        return Err(Error::Inconsistency(format!(
            "interior-minimum case produced a non-positive pump radicand {radicand} \
             (d_a = {d_a}, d_b = {d_b}, sigma = {sigma})"
        )));
    }
    Ok(2.0 * radicand.sqrt())
}

/// Heralded-width limit as the pump duration goes to zero.
pub fn heralded_width_limit_zero_pump(d_a: f64, d_b: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let sum = d_a + d_b;
    (d_a * d_a * s2 + sum * sum / (d_b * d_b * s2)).sqrt()
}

/// Heralded-width limit as the pump duration goes to infinity.
pub fn heralded_width_limit_infinite_pump(d_a: f64, d_b: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let sum = d_a + d_b;
    (4.0 / s2 + sum * sum * s2 / 4.0).sqrt()
}

/// Classify the pump optimization for a fixed crystal and negative-dispersion
/// arms, returning the optimal pump duration when it exists and the limiting
/// width otherwise. Ties on any boundary resolve to the monotone regime.
pub fn optimal_pump_fixed_crystal(d_a: f64, d_b: f64, sigma: f64) -> Result<PumpOptimum> {
    require_negative_pair(d_a, d_b)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and > 0, got {sigma}"
        )));
    }

    let ratio = d_b / d_a; // both negative, so the ratio is positive
    let heavy = ratio_threshold_heavy_heralding();
    let light = ratio_threshold_light_heralding();
    let bounds = case_boundaries(d_a, d_b)?;

    let regime = if ratio >= heavy {
        // Heralding arm much heavier: no minimum inside the sigma band.
        match bounds.increasing_band {
            Some((lo, hi)) if sigma >= lo && sigma <= hi => PumpRegime::InfimumAtZero,
            _ => PumpRegime::InteriorMinimum,
        }
    } else if ratio <= light {
        match bounds.decreasing_band {
            Some((lo, hi)) if sigma >= lo && sigma <= hi => PumpRegime::InfimumAtInfinity,
            _ => PumpRegime::InteriorMinimum,
        }
    } else {
        PumpRegime::InteriorMinimum
    };

    match regime {
        PumpRegime::InteriorMinimum => {
            let tau_p = interior_pump_optimum(d_a, d_b, sigma)?;
            let src = SourceParams::new(tau_p, sigma)?;
            Ok(PumpOptimum {
                regime,
                tau_p_star: Some(tau_p),
                tau_ah_at_optimum: tau_heralded(&src, d_a, d_b),
            })
        }
        PumpRegime::InfimumAtZero => Ok(PumpOptimum {
            regime,
            tau_p_star: None,
            tau_ah_at_optimum: heralded_width_limit_zero_pump(d_a, d_b, sigma),
        }),
        PumpRegime::InfimumAtInfinity => Ok(PumpOptimum {
            regime,
            tau_p_star: None,
            tau_ah_at_optimum: heralded_width_limit_infinite_pump(d_a, d_b, sigma),
        }),
    }
}
