//! Event-level Monte-Carlo simulation of the BB84 acceptance model.
//!
//! Instead of evaluating the closed-form acceptance probability, each trial
//! draws the physical events: photon survival in each fiber, a Gaussian
//! arrival time checked against the detection window, and Poissonian dark
//! counts in the per-branch windows. Accepted events missing at least one
//! real photon flip a fair coin for the bit error. This validates the
//! window-capture function, the linear dark-count expression, and the
//! four-branch acceptance bookkeeping against sampled statistics.

use crate::qkd::{link_widths, QkdScenario};
use crate::temporal::SourceParams;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Sampled estimates with their standard errors.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub trials: u64,
    pub accepted: u64,
    pub p_exp: f64,
    pub p_exp_se: f64,
    pub qber: f64,
    pub qber_se: f64,
}

/// Simulate `trials` emitted pairs through the scenario at fixed windows.
pub fn simulate(s: &QkdScenario, xi_a: f64, xi_b: f64, trials: u64, seed: u64) -> McEstimate {
    let w = link_widths(s);
    let t_a = crate::qkd::transmittance(&s.channel_a);
    let t_b = crate::qkd::transmittance(&s.channel_b);
    // Poisson(lambda) >= 1 with lambda = mean dark counts in the window.
    let dark_p = |xi: f64, tau: f64, rate: f64| -> f64 {
        let lambda = 2.0 * rate * xi * tau;
        -(-lambda).exp_m1()
    };
    let p_dark_ah = dark_p(xi_a, w.tau_ah, s.detector_a.dark_rate);
    let p_dark_bh = dark_p(xi_b, w.tau_bh, s.detector_b.dark_rate);
    let p_dark_a = dark_p(xi_a, w.tau_a, s.detector_a.dark_rate);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0u64;
    let mut errors = 0u64;
    for _ in 0..trials {
        let arrived_a = rng.gen::<f64>() < t_a;
        let captured_a = arrived_a && {
            let z: f64 = rng.sample(StandardNormal);
            z.abs() < xi_a / 2.0
        };
        let arrived_b = rng.gen::<f64>() < t_b;
        let captured_b = arrived_b && {
            let z: f64 = rng.sample(StandardNormal);
            z.abs() < xi_b / 2.0
        };

        let (accept, noisy) = match (captured_a, captured_b) {
            (true, true) => (true, false),
            (true, false) => (rng.gen::<f64>() < p_dark_bh, true),
            (false, true) => (rng.gen::<f64>() < p_dark_ah, true),
            (false, false) => (
                rng.gen::<f64>() < p_dark_a && rng.gen::<f64>() < p_dark_bh,
                true,
            ),
        };
        if accept {
            accepted += 1;
            if noisy && rng.gen::<bool>() {
                errors += 1;
            }
        }
    }

    let n = trials as f64;
    let p = accepted as f64 / n;
    let q = if accepted > 0 {
        errors as f64 / accepted as f64
    } else {
        0.0
    };
    McEstimate {
        trials,
        accepted,
        p_exp: p,
        p_exp_se: (p * (1.0 - p) / n).sqrt(),
        qber: q,
        qber_se: if accepted > 0 {
            (q * (1.0 - q) / accepted as f64).sqrt()
        } else {
            0.0
        },
    }
}

/// Deterministic family of scenarios for randomized oracle comparisons.
/// Links are short enough that 1e7 trials resolve the acceptance
/// probability to a fraction of a percent, and dark rates high enough that
/// hundreds of error events land in the sample.
pub fn randomized_scenarios(count: usize, seed: u64) -> Vec<(QkdScenario, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let tau_p = 10f64.powf(rng.gen_range(-12.0..-9.5));
            let sigma = 10f64.powf(rng.gen_range(10.5..12.5));
            let l_a = 10f64.powf(rng.gen_range(3.0..4.5));
            let l_b = 10f64.powf(rng.gen_range(3.0..4.5));
            let dark = 10f64.powf(rng.gen_range(4.5..6.0));
            let jitter = if rng.gen::<bool>() { 0.0 } else { 1e-11 };
            let s = QkdScenario::new(
                SourceParams::new(tau_p, sigma).unwrap(),
                crate::temporal::ChannelParams::new(l_a, -1.15e-26, 0.2).unwrap(),
                crate::temporal::ChannelParams::new(l_b, -1.15e-26, 0.2).unwrap(),
                crate::temporal::DetectorParams::new(jitter, dark, 6.0).unwrap(),
                crate::temporal::DetectorParams::new(jitter, dark, 6.0).unwrap(),
            );
            let xi_a = rng.gen_range(2.0..10.0);
            let xi_b = rng.gen_range(2.0..10.0);
            (s, xi_a, xi_b)
        })
        .collect()
}
