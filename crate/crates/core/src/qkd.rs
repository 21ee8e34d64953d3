//! Entanglement-based BB84 link budget: detection windows, dark counts,
//! QBER, the key-rate lower bound, and maximum-security-distance solvers.
//!
//! The model: a perfect pair source between Alice and Bob, lossy fibers,
//! detectors with dark counts (the only error source) and optional timing
//! jitter. Each lab accepts events inside a window of `xi` times the
//! relevant photon width; widths come from the closed forms in
//! [`crate::temporal`], jitter-augmented when jitter is non-zero. The key
//! bound is `K = p_exp (1 - 2 H(Q))`, clamped at zero.

use crate::analytic;
use crate::error::{Error, Result};
use crate::numeric::{bisect_zero_crossing, minimize_scalar, ScalarSearchSpec};
use crate::temporal::{
    accumulated_dispersion, tau_heralded_jittered, tau_unheralded_jittered, ChannelParams,
    DetectorParams, SourceParams,
};

/// Detection-window factor search box. Ten-sigma windows capture all but
/// ~1e-8 of the signal; going wider only collects noise.
pub const WINDOW_BOX: (f64, f64) = (0.1, 20.0);

/// Pump-duration bracket for numeric per-link source optimization.
const PUMP_BRACKET: (f64, f64) = (1e-13, 1e-7);

/// A full link configuration: source, two fiber arms, two detectors.
#[derive(Debug, Clone, Copy)]
pub struct QkdScenario {
    pub source: SourceParams,
    pub channel_a: ChannelParams,
    pub channel_b: ChannelParams,
    pub detector_a: DetectorParams,
    pub detector_b: DetectorParams,
}

impl QkdScenario {
    pub fn new(
        source: SourceParams,
        channel_a: ChannelParams,
        channel_b: ChannelParams,
        detector_a: DetectorParams,
        detector_b: DetectorParams,
    ) -> Self {
        Self {
            source,
            channel_a,
            channel_b,
            detector_a,
            detector_b,
        }
    }

    pub fn with_lengths(&self, l_a: f64, l_b: f64) -> Result<Self> {
        Ok(Self {
            channel_a: self.channel_a.with_length(l_a)?,
            channel_b: self.channel_b.with_length(l_b)?,
            ..*self
        })
    }

    pub fn with_source(&self, source: SourceParams) -> Self {
        Self { source, ..*self }
    }
}

/// Channel transmittance `10^(-alpha L / 10)`.
pub fn transmittance(channel: &ChannelParams) -> f64 {
    10f64.powf(-channel.alpha_db_per_km * (channel.length / 1000.0) / 10.0)
}

/// Probability that a photon of width `tau` falls inside a window of width
/// `xi * tau` centered on it: `erf(xi / (2 sqrt 2))`.
pub fn window_capture(xi: f64) -> f64 {
    libm::erf(xi / (2.0 * 2f64.sqrt()))
}

/// Probability of a dark count in one of a lab's two detectors during a
/// window of width `xi * tau`, capped at one.
pub fn dark_count_probability(xi: f64, tau: f64, dark_rate: f64) -> f64 {
    (2.0 * dark_rate * xi * tau).min(1.0)
}

/// True when the linear dark-count expression saturates the probability cap.
pub fn dark_count_saturated(xi: f64, tau: f64, dark_rate: f64) -> bool {
    2.0 * dark_rate * xi * tau >= 1.0
}

/// Shannon binary entropy with the continuity convention H(0) = H(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "entropy argument must be in [0, 1], got {x}"
        )));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-(x * x.ln() + (1.0 - x) * (1.0 - x).ln()) / std::f64::consts::LN_2)
}

/// Accumulated dispersion of both arms of a scenario, s^2.
pub fn accumulated_dispersions(s: &QkdScenario) -> (f64, f64) {
    (
        accumulated_dispersion(&s.channel_a),
        accumulated_dispersion(&s.channel_b),
    )
}

/// Jitter-augmented temporal widths of both arms, seconds.
#[derive(Debug, Clone, Copy)]
pub struct LinkWidths {
    pub tau_a: f64,
    pub tau_b: f64,
    pub tau_ah: f64,
    pub tau_bh: f64,
}

pub fn link_widths(s: &QkdScenario) -> LinkWidths {
    let d_a = accumulated_dispersion(&s.channel_a);
    let d_b = accumulated_dispersion(&s.channel_b);
    let (j_a, j_b) = (s.detector_a.jitter, s.detector_b.jitter);
    LinkWidths {
        tau_a: tau_unheralded_jittered(&s.source, d_a, j_a),
        tau_b: tau_unheralded_jittered(&s.source, d_b, j_b),
        tau_ah: tau_heralded_jittered(&s.source, d_a, d_b, j_a, j_b),
        tau_bh: tau_heralded_jittered(&s.source, d_b, d_a, j_b, j_a),
    }
}

fn signal_and_acceptance(s: &QkdScenario, xi_a: f64, xi_b: f64) -> Result<(f64, f64)> {
    if !(xi_a > 0.0 && xi_b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window factors must be > 0, got {xi_a}, {xi_b}"
        )));
    }
    let w = link_widths(s);
    let sa = transmittance(&s.channel_a) * window_capture(xi_a);
    let sb = transmittance(&s.channel_b) * window_capture(xi_b);
    let p_ah = dark_count_probability(xi_a, w.tau_ah, s.detector_a.dark_rate);
    let p_bh = dark_count_probability(xi_b, w.tau_bh, s.detector_b.dark_rate);
    let p_a = dark_count_probability(xi_a, w.tau_a, s.detector_a.dark_rate);

    let signal = sa * sb;
    let p_exp = signal
        + sa * (1.0 - sb) * p_bh
        + (1.0 - sa) * sb * p_ah
        + (1.0 - sa) * (1.0 - sb) * p_a * p_bh;
    Ok((signal, p_exp))
}

/// Probability that an emitted pair is accepted for key generation.
pub fn acceptance_probability(s: &QkdScenario, xi_a: f64, xi_b: f64) -> Result<f64> {
    signal_and_acceptance(s, xi_a, xi_b).map(|(_, p)| p)
}

/// Quantum bit error rate: accepted events lacking at least one real photon
/// are wrong half the time.
pub fn qber(s: &QkdScenario, xi_a: f64, xi_b: f64) -> Result<f64> {
    let (signal, p_exp) = signal_and_acceptance(s, xi_a, xi_b)?;
    if p_exp <= 0.0 {
        return Err(Error::UndefinedQber);
    }
    Ok(((p_exp - signal) / (2.0 * p_exp)).clamp(0.0, 0.5))
}

/// Full link metrics at given window factors.
#[derive(Debug, Clone, Copy)]
pub struct QkdMetrics {
    pub p_exp: f64,
    pub qber: f64,
    /// Key-rate lower bound per emitted pair, clamped at zero.
    pub key_rate: f64,
    pub xi_a: f64,
    pub xi_b: f64,
}

/// Key bound before clamping; negative values mean "insecure here".
fn unclamped_key(s: &QkdScenario, xi_a: f64, xi_b: f64) -> Result<f64> {
    let (signal, p_exp) = signal_and_acceptance(s, xi_a, xi_b)?;
    if p_exp <= 0.0 {
        return Ok(0.0);
    }
    let q = ((p_exp - signal) / (2.0 * p_exp)).clamp(0.0, 0.5);
    Ok(p_exp * (1.0 - 2.0 * binary_entropy(q)?))
}

pub fn key_rate(s: &QkdScenario, xi_a: f64, xi_b: f64) -> Result<QkdMetrics> {
    let (signal, p_exp) = signal_and_acceptance(s, xi_a, xi_b)?;
    if p_exp <= 0.0 {
        return Err(Error::UndefinedQber);
    }
    let q = ((p_exp - signal) / (2.0 * p_exp)).clamp(0.0, 0.5);
    let k = (p_exp * (1.0 - 2.0 * binary_entropy(q)?)).max(0.0);
    Ok(QkdMetrics {
        p_exp,
        qber: q,
        key_rate: k,
        xi_a,
        xi_b,
    })
}

/// Outcome of the per-link window optimization.
#[derive(Debug, Clone, Copy)]
pub struct WindowOptimum {
    pub metrics: QkdMetrics,
    /// Best unclamped key bound; <= 0 exactly when `insecure`.
    pub unclamped: f64,
    /// A window factor ended on the search-box edge.
    pub boundary_hit: bool,
    /// No window choice yields a positive key bound.
    pub insecure: bool,
}

/// Maximize the key bound over both window factors: per-coordinate
/// golden-section over the log box, two refinement rounds. The unclamped
/// bound is the objective so that the sign stays meaningful in the
/// insecure regime.
pub fn optimize_windows(s: &QkdScenario) -> Result<WindowOptimum> {
    let spec = ScalarSearchSpec::new(WINDOW_BOX.0, WINDOW_BOX.1, 1e-6, 300)?;
    let mut xi_a = 6.0;
    let mut xi_b = 6.0;
    let mut boundary = false;
    for _ in 0..2 {
        let xb = xi_b;
        let best_a = minimize_scalar(
            |x| -unclamped_key(s, x, xb).unwrap_or(f64::NEG_INFINITY),
            &spec,
        )?;
        xi_a = best_a.x;
        let xa = xi_a;
        let best_b = minimize_scalar(
            |x| -unclamped_key(s, xa, x).unwrap_or(f64::NEG_INFINITY),
            &spec,
        )?;
        xi_b = best_b.x;
        boundary = best_a.boundary.is_some() || best_b.boundary.is_some();
    }
    let unclamped = unclamped_key(s, xi_a, xi_b)?;
    let metrics = key_rate(s, xi_a, xi_b)?;
    Ok(WindowOptimum {
        metrics,
        unclamped,
        boundary_hit: boundary,
        insecure: unclamped <= 0.0,
    })
}

/// Which arm length varies in distance solvers and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    A,
    B,
    BothSymmetric,
}

/// How the source parameters follow the link geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourcePolicy {
    /// Keep the template's source.
    Fixed,
    /// Keep the template's sigma, set the pump duration to the closed-form
    /// width optimum for the current dispersions (bracket-clamped in the
    /// monotone regimes).
    PumpWidthOptimal,
    /// Closed-form joint optimum; requires equal dispersion in both arms.
    FullWidthOptimal,
    /// Keep the template's sigma, maximize the key bound over the pump
    /// duration numerically (windows re-optimized inside).
    PumpKeyRateOptimal,
}

fn resolved_source(template: &QkdScenario, policy: SourcePolicy) -> Result<SourceParams> {
    let d_a = accumulated_dispersion(&template.channel_a);
    let d_b = accumulated_dispersion(&template.channel_b);
    match policy {
        SourcePolicy::Fixed => Ok(template.source),
        SourcePolicy::PumpWidthOptimal => {
            let sigma = template.source.sigma;
            let tau_p = if d_a == 0.0 || d_b == 0.0 {
                template.source.tau_p
            } else {
                let opt = analytic::optimal_pump_fixed_crystal(d_a, d_b, sigma)?;
                match opt.tau_p_star {
                    Some(t) => t,
                    None => match opt.regime {
                        analytic::PumpRegime::InfimumAtZero => PUMP_BRACKET.0,
                        _ => PUMP_BRACKET.1,
                    },
                }
            };
            SourceParams::new(tau_p, sigma)
        }
        SourcePolicy::FullWidthOptimal => {
            if d_a == 0.0 || (d_a - d_b).abs() > 1e-6 * d_a.abs() {
                return Err(Error::OutsideRegime(format!(
                    "joint closed-form optimum needs equal non-zero dispersions, got {d_a}, {d_b}"
                )));
            }
            let opt = analytic::symmetric_full_optimum(d_a)?;
            SourceParams::new(opt.tau_p, opt.sigma)
        }
        SourcePolicy::PumpKeyRateOptimal => {
            let sigma = template.source.sigma;
            let spec = ScalarSearchSpec::new(PUMP_BRACKET.0, PUMP_BRACKET.1, 1e-4, 200)?;
            let best = minimize_scalar(
                |tau_p| {
                    SourceParams::new(tau_p, sigma)
                        .and_then(|src| optimize_windows(&template.with_source(src)))
                        .map(|w| -w.unclamped)
                        .unwrap_or(f64::INFINITY)
                },
                &spec,
            )?;
            SourceParams::new(best.x, sigma)
        }
    }
}

fn scenario_at(
    template: &QkdScenario,
    arm: Arm,
    length: f64,
    policy: SourcePolicy,
) -> Result<QkdScenario> {
    let base = match arm {
        Arm::A => template.with_lengths(length, template.channel_b.length)?,
        Arm::B => template.with_lengths(template.channel_a.length, length)?,
        Arm::BothSymmetric => template.with_lengths(length, length)?,
    };
    let source = resolved_source(&base, policy)?;
    Ok(base.with_source(source))
}

/// Best unclamped key bound at a given varied-arm length.
fn best_bound_at(
    template: &QkdScenario,
    arm: Arm,
    length: f64,
    policy: SourcePolicy,
) -> Result<f64> {
    let s = scenario_at(template, arm, length, policy)?;
    Ok(optimize_windows(&s)?.unclamped)
}

/// Largest varied-arm length with a positive key bound, to 1 m.
///
/// Windows are re-optimized (and the source re-resolved per `policy`) at
/// every probed length. The search starts at 1 m; a link that is insecure
/// even there has no security distance.
pub fn max_security_distance(
    template: &QkdScenario,
    arm: Arm,
    policy: SourcePolicy,
) -> Result<f64> {
    let lo = 1.0;
    let g = |l: f64| best_bound_at(template, arm, l, policy).unwrap_or(f64::NEG_INFINITY);
    if g(lo) <= 0.0 {
        return Err(Error::InsecureAtZeroLength);
    }
    let mut hi = 50_000.0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Inconsistency(
                "key bound stays positive beyond 1e8 m; no crossing to bracket".into(),
            ));
        }
    }
    bisect_zero_crossing(g, lo, hi, 1.0)
}

/// Policy for the heralding-arm length in key-rate sweeps.
#[derive(Debug, Clone, Copy)]
pub enum HeraldingArmPolicy {
    Fixed(f64),
    EqualToA,
    /// Maximize the key bound over the heralding-arm length in this range.
    Optimized {
        lo: f64,
        hi: f64,
    },
}

/// One cell of a key-rate sweep.
#[derive(Debug, Clone)]
pub struct KeyratePoint {
    pub l_a: f64,
    pub l_b: f64,
    pub metrics: Option<QkdMetrics>,
    pub error: Option<String>,
}

/// Key rate as a function of the A-arm length, with per-point window
/// optimization and the selected heralding-arm policy. Failures are
/// recorded per point, not propagated.
pub fn keyrate_sweep(
    template: &QkdScenario,
    l_a_values: &[f64],
    l_b_policy: HeraldingArmPolicy,
    source_policy: SourcePolicy,
) -> Vec<KeyratePoint> {
    use rayon::prelude::*;
    l_a_values
        .par_iter()
        .map(|&l_a| {
            let evaluate = |l_b: f64| -> Result<QkdMetrics> {
                let s = scenario_at(
                    &template.with_lengths(l_a, l_b).unwrap_or(*template),
                    Arm::A,
                    l_a,
                    source_policy,
                )?;
                Ok(optimize_windows(&s)?.metrics)
            };
            let l_b = match l_b_policy {
                HeraldingArmPolicy::Fixed(l) => Ok(l),
                HeraldingArmPolicy::EqualToA => Ok(l_a),
                HeraldingArmPolicy::Optimized { lo, hi } => {
                    ScalarSearchSpec::new(lo.max(1.0), hi, 1e-4, 200)
                        .and_then(|spec| {
                            minimize_scalar(
                                |l| evaluate(l).map(|m| -m.key_rate).unwrap_or(f64::INFINITY),
                                &spec,
                            )
                        })
                        .map(|m| m.x)
                }
            };
            match l_b.and_then(|l_b| evaluate(l_b).map(|m| (l_b, m))) {
                Ok((l_b, metrics)) => KeyratePoint {
                    l_a,
                    l_b,
                    metrics: Some(metrics),
                    error: None,
                },
                Err(e) => KeyratePoint {
                    l_a,
                    l_b: f64::NAN,
                    metrics: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
