//! Closed-form temporal widths of photon pairs after dispersive propagation.
//!
//! A pulsed-pump down-conversion source is described by two numbers: the pump
//! pulse duration `tau_p` and the effective phase-matching width `sigma` (an
//! angular-frequency detuning width). Each photon then travels through a
//! channel with accumulated dispersion `D = beta * L`. The functions here give
//! the standard deviation of the arrival-time distribution at the detector:
//! unconditional ([`tau_unheralded`]), conditioned on the twin's detection time
//! ([`tau_heralded`]), and broadened by detector timing jitter.
//!
//! All quantities are SI: seconds, meters, s^-1, s^2/m. Parameters are
//! validated at construction; the width functions themselves are total over
//! valid parameters.

use crate::error::{Error, Result};

/// Pump duration and effective phase-matching width of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Pump pulse duration, seconds. Strictly positive.
    pub tau_p: f64,
    /// Effective phase-matching function width, s^-1 (angular detuning width).
    /// Strictly positive.
    pub sigma: f64,
}

impl SourceParams {
    pub fn new(tau_p: f64, sigma: f64) -> Result<Self> {
        if !(tau_p.is_finite() && tau_p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pump duration must be finite and > 0, got {tau_p}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phase-matching width must be finite and > 0, got {sigma}"
            )));
        }
        Ok(Self { tau_p, sigma })
    }
}

/// One fiber arm: length, dispersion coefficient, attenuation.
///
/// `beta` follows the convention that the channel's group velocity dispersion
/// is `2 * beta`; standard single-mode fiber at 1550 nm (18 ps/(nm km)) has
/// `beta = -1.15e-26 s^2/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Fiber length, meters. Non-negative.
    pub length: f64,
    /// Dispersion coefficient, s^2/m (half the conventional GVD).
    pub beta: f64,
    /// Attenuation, dB/km. Non-negative.
    pub alpha_db_per_km: f64,
}

impl ChannelParams {
    pub fn new(length: f64, beta: f64, alpha_db_per_km: f64) -> Result<Self> {
        if !(length.is_finite() && length >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "channel length must be finite and >= 0, got {length}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dispersion coefficient must be finite, got {beta}"
            )));
        }
        if !(alpha_db_per_km.is_finite() && alpha_db_per_km >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "attenuation must be finite and >= 0, got {alpha_db_per_km}"
            )));
        }
        Ok(Self {
            length,
            beta,
            alpha_db_per_km,
        })
    }

    /// Same channel with a different length.
    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(length, self.beta, self.alpha_db_per_km)
    }
}

/// Timing jitter, dark-count rate and default window factor of one detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Standard deviation of the detection-time spread, seconds.
    pub jitter: f64,
    /// Dark-count rate, counts per second.
    pub dark_rate: f64,
    /// Detection-window width in units of the photon's temporal width.
    pub window_factor: f64,
}

impl DetectorParams {
    pub fn new(jitter: f64, dark_rate: f64, window_factor: f64) -> Result<Self> {
        if !(jitter.is_finite() && jitter >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "jitter must be finite and >= 0, got {jitter}"
            )));
        }
        if !(dark_rate.is_finite() && dark_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dark rate must be finite and >= 0, got {dark_rate}"
            )));
        }
        if !(window_factor.is_finite() && window_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window factor must be finite and > 0, got {window_factor}"
            )));
        }
        Ok(Self {
            jitter,
            dark_rate,
            window_factor,
        })
    }
}

/// Unheralded and heralded width of one arm, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalWidths {
    pub tau_unheralded: f64,
    pub tau_heralded: f64,
}

/// Accumulated dispersion of a channel: `D = beta * length`, s^2.
pub fn accumulated_dispersion(channel: &ChannelParams) -> f64 {
    channel.beta * channel.length
}

/// Temporal width of a photon when nothing is known about its twin.
///
/// `d_a` is the accumulated dispersion of this photon's own arm; the width
/// does not depend on the other arm.
pub fn tau_unheralded(source: &SourceParams, d_a: f64) -> f64 {
    let tp2 = source.tau_p * source.tau_p;
    let s2 = source.sigma * source.sigma;
    let num = (tp2 + d_a * d_a * s2) * (4.0 + s2 * tp2);
    num.sqrt() / (2.0 * source.sigma * source.tau_p)
}

/// Temporal width of a photon conditioned on the detection time of its twin.
///
/// `d_a` is this photon's accumulated dispersion, `d_b` the heralding arm's.
pub fn tau_heralded(source: &SourceParams, d_a: f64, d_b: f64) -> f64 {
    let tp2 = source.tau_p * source.tau_p;
    let s2 = source.sigma * source.sigma;
    let anti = tp2 - d_a * d_b * s2;
    let sum_d = d_a + d_b;
    let bw = s2 * tp2 + 4.0;
    let num = 16.0 * anti * anti + sum_d * sum_d * bw * bw;
    let den = 4.0 * (tp2 + d_b * d_b * s2) * bw;
    (num / den).sqrt()
}

/// Both widths of one arm at once.
pub fn widths(source: &SourceParams, d_a: f64, d_b: f64) -> TemporalWidths {
    TemporalWidths {
        tau_unheralded: tau_unheralded(source, d_a),
        tau_heralded: tau_heralded(source, d_a, d_b),
    }
}

/// Unheralded width including detector jitter: quadrature of the two spreads.
pub fn tau_unheralded_jittered(source: &SourceParams, d_a: f64, jitter_a: f64) -> f64 {
    let t = tau_unheralded(source, d_a);
    (t * t + jitter_a * jitter_a).sqrt()
}

/// Weight with which the heralding detector's jitter enters the heralded
/// width. Zero exactly when `sigma^2 tau_p^2 = 4` or `tau_p^2 = d_a d_b sigma^2`
/// (uncorrelated arrival times); equals the squared regression slope of this
/// arm's arrival time on the heralding arm's.
pub fn heralding_jitter_weight(source: &SourceParams, d_a: f64, d_b: f64) -> f64 {
    let tp2 = source.tau_p * source.tau_p;
    let s2 = source.sigma * source.sigma;
    let anti = tp2 - d_a * d_b * s2;
    let band = s2 * tp2 - 4.0;
    let den_a = tp2 + d_b * d_b * s2;
    let den_b = s2 * tp2 + 4.0;
    let r = (anti * band) / (den_a * den_b);
    r * r
}

/// Heralded width including the jitter of both detectors.
///
/// First order in the heralding jitter: exact when `jitter_b` is small
/// against the heralding photon's own temporal width.
pub fn tau_heralded_jittered(
    source: &SourceParams,
    d_a: f64,
    d_b: f64,
    jitter_a: f64,
    jitter_b: f64,
) -> f64 {
    let t = tau_heralded(source, d_a, d_b);
    let x = heralding_jitter_weight(source, d_a, d_b);
    (t * t + jitter_a * jitter_a + x * jitter_b * jitter_b).sqrt()
}

/// Validate a jitter argument (helper for callers taking raw jitters).
pub fn validate_jitter(jitter: f64) -> Result<()> {
    if !(jitter.is_finite() && jitter >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "jitter must be finite and >= 0, got {jitter}"
        )));
    }
    Ok(())
}
