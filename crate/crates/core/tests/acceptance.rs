//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured numbers (visible with `--nocapture`).
//!
//! Criteria 8 and 9 encode headline claims whose reference values were read
//! off a published figure; the model's faithful numbers land just outside
//! two of the stated bands (documented in the repository notes). Those
//! assertions are kept as stated rather than widened.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc_core::analytic::{optimal_pump_fixed_crystal, symmetric_full_optimum, PumpRegime};
use spdc_core::crystal::{
    effective_sigma, effective_sigma_with_step, phase_matching_angle, phase_mismatch, CrystalSpec,
    DetuningConvention, SellmeierSet,
};
use spdc_core::montecarlo;
use spdc_core::numeric::full_optimum_2d;
use spdc_core::oracle::{
    convolve_jitter, empirical_widths, empirical_widths_streamed, joint_temporal_intensity,
    GridSpec,
};
use spdc_core::qkd::{
    acceptance_probability, max_security_distance, qber, Arm, QkdScenario, SourcePolicy,
};
use spdc_core::temporal::{
    tau_heralded, tau_heralded_jittered, tau_unheralded, ChannelParams, DetectorParams,
    SourceParams,
};
use spdc_core::units;
use std::time::Instant;

const BETA_SMF: f64 = -1.15e-26;

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:02} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion:02}: {detail}");
}

fn smf(length: f64) -> ChannelParams {
    ChannelParams::new(length, BETA_SMF, 0.2).unwrap()
}

fn base_scenario(tau_p: f64, sigma: f64, dark: f64, jitter: f64) -> QkdScenario {
    QkdScenario::new(
        SourceParams::new(tau_p, sigma).unwrap(),
        smf(1000.0),
        smf(1000.0),
        DetectorParams::new(jitter, dark, 6.0).unwrap(),
        DetectorParams::new(jitter, dark, 6.0).unwrap(),
    )
}

#[test]
fn criterion_01_closed_forms_match_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut dense_checked = 0;
    for _ in 0..100 {
        let tau_p = 10f64.powf(rng.gen_range(-13.0..-9.0));
        let sigma = 10f64.powf(rng.gen_range(10.0..13.0));
        let length = 10f64.powf(rng.gen_range(0.0..5.0));
        let src = SourceParams::new(tau_p, sigma).unwrap();
        let d = BETA_SMF * length;

        let measured = empirical_widths_streamed(&src, d, d).unwrap();
        let rel_a = (measured.tau_a / tau_unheralded(&src, d) - 1.0).abs();
        let rel_ah = (measured.tau_ah / tau_heralded(&src, d, d) - 1.0).abs();
        worst = worst.max(rel_a).max(rel_ah);

        // Where a dense grid fits, it must agree too.
        if let Ok(grid) = GridSpec::auto(&src, d, d) {
            if grid.n_a <= 2048 && grid.n_b <= 2048 {
                let dense = empirical_widths(&joint_temporal_intensity(&src, d, d, &grid).unwrap())
                    .unwrap();
                worst = worst.max((dense.tau_a / tau_unheralded(&src, d) - 1.0).abs());
                worst = worst.max((dense.tau_ah / tau_heralded(&src, d, d) - 1.0).abs());
                dense_checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        worst < 1e-3 && elapsed.as_secs() < 120,
        &format!(
            "closed forms vs oracle on 100 random points: worst rel {worst:.2e} \
             (limit 1e-3), {dense_checked} dense cross-checks, {elapsed:.1?} (limit 120 s)"
        ),
    );
}

#[test]
fn criterion_02_symmetric_optimum() {
    let d = -1.15e-23;
    let opt = symmetric_full_optimum(d).unwrap();
    let exact = (
        (opt.tau_p / 4.795_83e-12 - 1.0).abs() < 1e-4,
        (opt.sigma / 4.170_29e11 - 1.0).abs() < 1e-4,
        (opt.tau_ah / 4.795_83e-12 - 1.0).abs() < 1e-4,
    );
    let numeric = full_optimum_2d(d, d).unwrap();
    let agree = (numeric.tau_p / opt.tau_p - 1.0).abs() < 0.01
        && (numeric.sigma / opt.sigma - 1.0).abs() < 0.01
        && (numeric.value / opt.tau_ah - 1.0).abs() < 0.01;
    report(
        2,
        exact.0 && exact.1 && exact.2 && agree,
        &format!(
            "analytic ({:.4e} s, {:.4e} 1/s, {:.4e} s) vs numeric ({:.4e} s, {:.4e} 1/s, {:.4e} s), 1% agreement",
            opt.tau_p, opt.sigma, opt.tau_ah, numeric.tau_p, numeric.sigma, numeric.value
        ),
    );
}

#[test]
fn criterion_03_one_meter_checkpoint() {
    let d = BETA_SMF * 1.0;
    let analytic = symmetric_full_optimum(d).unwrap().tau_p;
    let numeric = full_optimum_2d(d, d).unwrap().tau_p;
    let ok = (analytic / 150e-15 - 1.0).abs() < 0.05 && (numeric / 150e-15 - 1.0).abs() < 0.05;
    report(
        3,
        ok,
        &format!(
            "optimal pump for 1 m arms: analytic {analytic:.4e} s, numeric {numeric:.4e} s \
             (150 fs within 5%)"
        ),
    );
}

#[test]
fn criterion_04_bandwidth_conversion() {
    let nm = units::sigma_to_bandwidth_m(1e11, 1550e-9) * 1e9;
    let sigma = units::bandwidth_m_to_sigma(0.13e-9, 1550e-9);
    let ok = (nm / 0.13 - 1.0).abs() < 0.05 && (sigma / 1e11 - 1.0).abs() < 0.05;
    report(
        4,
        ok,
        &format!("1e11 1/s <-> {nm:.4} nm at 1550 nm; 0.13 nm -> {sigma:.4e} 1/s (5%)"),
    );
}

/// Brute-force regime classification: argmin position on a dense log grid.
fn scan_regime(d_a: f64, d_b: f64, sigma: f64) -> PumpRegime {
    let n = 2000;
    let (lo, hi) = (1e-15f64.ln(), 1e-6f64.ln());
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..n {
        let tau_p = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        let src = SourceParams::new(tau_p, sigma).unwrap();
        let v = tau_heralded(&src, d_a, d_b);
        if v < best.0 {
            best = (v, i);
        }
    }
    match best.1 {
        0 => PumpRegime::InfimumAtZero,
        i if i == n - 1 => PumpRegime::InfimumAtInfinity,
        _ => PumpRegime::InteriorMinimum,
    }
}

#[test]
fn criterion_05_regime_classification() {
    // The hundredfold-asymmetric link inside the sigma band: width grows
    // monotonically with the pump duration.
    let spot = optimal_pump_fixed_crystal(-1.15e-23, -1.15e-21, 1e11).unwrap();
    let spot_ok = spot.regime == PumpRegime::InfimumAtZero
        && scan_regime(-1.15e-23, -1.15e-21, 1e11) == PumpRegime::InfimumAtZero;

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut disagreements = 0;
    let mut counts = [0usize; 3];
    for _ in 0..200 {
        let d_a = -10f64.powf(rng.gen_range(-26.0..-21.0)) * 1.15;
        let d_b = -10f64.powf(rng.gen_range(-26.0..-21.0)) * 1.15;
        let sigma = 10f64.powf(rng.gen_range(10.0..13.0));
        let predicted = optimal_pump_fixed_crystal(d_a, d_b, sigma).unwrap();
        let scanned = scan_regime(d_a, d_b, sigma);
        match predicted.regime {
            PumpRegime::InteriorMinimum => counts[0] += 1,
            PumpRegime::InfimumAtZero => counts[1] += 1,
            PumpRegime::InfimumAtInfinity => counts[2] += 1,
        }
        if predicted.regime != scanned {
            disagreements += 1;
            println!(
                "  disagreement at d_a={d_a:.3e}, d_b={d_b:.3e}, sigma={sigma:.3e}: \
                 classifier {:?} vs scan {:?}",
                predicted.regime, scanned
            );
        }
        // When interior, the closed-form optimum dominates the whole grid.
        if let Some(tp) = predicted.tau_p_star {
            let star = tau_heralded(&SourceParams::new(tp, sigma).unwrap(), d_a, d_b);
            for i in 0..400 {
                let tau_p = 10f64.powf(-15.0 + 9.0 * i as f64 / 399.0);
                let v = tau_heralded(&SourceParams::new(tau_p, sigma).unwrap(), d_a, d_b);
                assert!(v >= star * (1.0 - 1e-9), "grid beats closed-form optimum");
            }
        }
    }
    report(
        5,
        spot_ok && disagreements == 0,
        &format!(
            "monotone-increasing spot check ok; 200 random triples \
             (interior/zero/inf = {}/{}/{}), {disagreements} disagreements",
            counts[0], counts[1], counts[2]
        ),
    );
}

#[test]
fn criterion_06_arm_swap_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let src = SourceParams::new(
            10f64.powf(rng.gen_range(-13.0..-9.0)),
            10f64.powf(rng.gen_range(10.0..13.0)),
        )
        .unwrap();
        let d_a = BETA_SMF * 10f64.powf(rng.gen_range(0.0..5.0));
        let d_b = BETA_SMF * 10f64.powf(rng.gen_range(0.0..5.0));
        let lhs = tau_unheralded(&src, d_a) * tau_heralded(&src, d_b, d_a);
        let rhs = tau_unheralded(&src, d_b) * tau_heralded(&src, d_a, d_b);
        worst = worst.max((lhs / rhs - 1.0).abs());
    }
    report(
        6,
        worst < 1e-12,
        &format!("arm-swap identity on 1000 random tuples: worst rel {worst:.2e} (limit 1e-12)"),
    );
}

#[test]
fn criterion_07_jitter_weight_and_convolved_oracle() {
    use spdc_core::temporal::heralding_jitter_weight;
    // Exact zeros on the two vanishing loci (power-of-two values keep the
    // products exact in binary floating point).
    let sigma = 2f64.powi(41);
    let matched = SourceParams::new(2.0 / sigma, sigma).unwrap();
    let zero_band = heralding_jitter_weight(&matched, -3e-23, -5e-24) == 0.0;
    let d_pow = -(2f64.powi(-76));
    let balanced = SourceParams::new(2f64.powi(-35), sigma).unwrap();
    let zero_balance = heralding_jitter_weight(&balanced, d_pow, d_pow) == 0.0;

    // Convolved-oracle agreement in the regime where the closed form is
    // exact (heralding jitter small against the heralding arm's width).
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 8 {
        let tau_p = 10f64.powf(rng.gen_range(-12.3..-11.3));
        let sigma = 10f64.powf(rng.gen_range(11.5..12.3));
        let l_a = 10f64.powf(rng.gen_range(2.5..3.3));
        let l_b = 10f64.powf(rng.gen_range(2.5..3.3));
        let src = SourceParams::new(tau_p, sigma).unwrap();
        let (d_a, d_b) = (BETA_SMF * l_a, BETA_SMF * l_b);
        let grid = match GridSpec::auto(&src, d_a, d_b) {
            Ok(g) if g.n_a <= 2048 && g.n_b <= 2048 => g,
            _ => continue,
        };
        let ji = joint_temporal_intensity(&src, d_a, d_b, &grid).unwrap();
        let base = empirical_widths(&ji).unwrap();
        let tau_b_marg = tau_unheralded(&src, d_b);
        // The kernel-binning bias must stay far below the tolerance: require
        // the widths to span many grid cells.
        let dt_a = ji.t_a[1] - ji.t_a[0];
        let dt_b = ji.t_b[1] - ji.t_b[0];
        if base.tau_ah < 25.0 * dt_a || tau_b_marg < 25.0 * dt_b {
            continue;
        }
        let j_a = rng.gen_range(0.05..0.25) * base.tau_ah.min(tau_b_marg);
        let j_b = rng.gen_range(0.05..0.25) * base.tau_ah.min(tau_b_marg);
        let convolved = convolve_jitter(&ji, j_a, j_b).unwrap();
        let measured = empirical_widths(&convolved).unwrap().tau_ah;
        let formula = tau_heralded_jittered(&src, d_a, d_b, j_a, j_b);
        worst = worst.max((formula / measured - 1.0).abs());
        checked += 1;
    }
    report(
        7,
        zero_band && zero_balance && worst < 1e-3,
        &format!(
            "weight zero on both loci: {}; jitter-convolved oracle vs closed form \
             on {checked} points: worst rel {worst:.2e} (limit 1e-3)",
            zero_band && zero_balance
        ),
    );
}

#[test]
fn criterion_08_qkd_headline_distances() {
    let start = Instant::now();
    let template = base_scenario(1e-9, 1e12, 1e3, 0.0);
    let dist = |policy| max_security_distance(&template, Arm::BothSymmetric, policy).unwrap();
    let plain = dist(SourcePolicy::Fixed);
    let pump_only = dist(SourcePolicy::PumpWidthOptimal);
    let full = dist(SourcePolicy::FullWidthOptimal);
    let gain_full = (full / plain - 1.0) * 100.0;
    let gain_pump = (pump_only / plain - 1.0) * 100.0;
    let elapsed = start.elapsed();
    let in_bands = (25.0..=35.0).contains(&gain_full) && (15.0..=25.0).contains(&gain_pump);
    report(
        8,
        in_bands && elapsed.as_secs() < 300,
        &format!(
            "max distances per arm: fixed {:.2} km, pump-optimized {:.2} km (+{gain_pump:.2}%, \
             band 20+-5), fully optimized {:.2} km (+{gain_full:.2}%, band 30+-5); {elapsed:.1?}",
            plain / 1e3,
            pump_only / 1e3,
            full / 1e3
        ),
    );
}

#[test]
fn criterion_09_jitter_robustness() {
    let ideal = base_scenario(1e-9, 1e12, 1e3, 0.0);
    let jittered = base_scenario(1e-9, 1e12, 1e3, 1e-10);
    let d0 =
        max_security_distance(&ideal, Arm::BothSymmetric, SourcePolicy::FullWidthOptimal).unwrap();
    let d1 = max_security_distance(
        &jittered,
        Arm::BothSymmetric,
        SourcePolicy::FullWidthOptimal,
    )
    .unwrap();
    let reduction_km = (d0 - d1) / 1e3;
    report(
        9,
        reduction_km < 10.0 && reduction_km > 0.0,
        &format!(
            "100 ps jitter on all detectors: {:.2} km -> {:.2} km, reduction {reduction_km:.2} km \
             (limit 10 km)",
            d0 / 1e3,
            d1 / 1e3
        ),
    );
}

#[test]
fn criterion_10_heralding_arm_effect() {
    // Wide crystal (sigma above the optimum): lengthening the heralding arm
    // extends the secure range of arm A, by tens of km overall.
    let template = base_scenario(1e-9, 1e12, 1e3, 0.0);
    let dist_at = |tpl: &QkdScenario, l_b: f64| {
        let t = tpl.with_lengths(1000.0, l_b).unwrap();
        max_security_distance(&t, Arm::A, SourcePolicy::PumpKeyRateOptimal).unwrap()
    };
    let wide: Vec<f64> = [1e3, 20e3, 50e3, 100e3]
        .iter()
        .map(|&l| dist_at(&template, l))
        .collect();
    let monotone_up = wide.windows(2).all(|w| w[1] >= w[0] - 1.0);
    let gain_km = (wide[3] - wide[0]) / 1e3;

    // Narrow crystal (sigma below the optimum): the effect reverses.
    let narrow_tpl = template.with_source(SourceParams::new(1e-11, 1e10).unwrap());
    let narrow: Vec<f64> = [1e3, 30e3, 60e3]
        .iter()
        .map(|&l| dist_at(&narrow_tpl, l))
        .collect();
    let monotone_down = narrow.windows(2).all(|w| w[1] <= w[0] + 1.0);

    report(
        10,
        monotone_up && gain_km >= 20.0 && monotone_down,
        &format!(
            "sigma > opt: max L_A {:.1}/{:.1}/{:.1}/{:.1} km for L_B 1/20/50/100 km \
             (gain {gain_km:.1} km, needs >= 20); sigma < opt: {:.1}/{:.1}/{:.1} km, reversed: {}",
            wide[0] / 1e3,
            wide[1] / 1e3,
            wide[2] / 1e3,
            wide[3] / 1e3,
            narrow[0] / 1e3,
            narrow[1] / 1e3,
            narrow[2] / 1e3,
            monotone_down
        ),
    );
}

#[test]
fn criterion_11_montecarlo_oracle() {
    let scenarios = montecarlo::randomized_scenarios(10, 1111);
    let mut max_z: f64 = 0.0;
    let mut pass = true;
    for (i, (s, xi_a, xi_b)) in scenarios.iter().enumerate() {
        let est = montecarlo::simulate(s, *xi_a, *xi_b, 10_000_000, 2200 + i as u64);
        let p = acceptance_probability(s, *xi_a, *xi_b).unwrap();
        let q = qber(s, *xi_a, *xi_b).unwrap();
        let se_p = (p * (1.0 - p) / est.trials as f64).sqrt();
        let se_q = (q * (1.0 - q) / (p * est.trials as f64)).sqrt();
        let z_p = (est.p_exp - p).abs() / se_p;
        let z_q = (est.qber - q).abs() / se_q;
        max_z = max_z.max(z_p).max(z_q);
        if z_p > 3.0 || z_q > 3.0 {
            pass = false;
            println!(
                "  scenario {i}: p {p:.4e} vs {:.4e} (z={z_p:.2}), q {q:.4e} vs {:.4e} (z={z_q:.2})",
                est.p_exp, est.qber
            );
        }
    }
    report(
        11,
        pass,
        &format!("10 scenarios x 1e7 trials: worst |z| = {max_z:.2} (limit 3 standard errors)"),
    );
}

#[test]
fn criterion_12_crystal_properties() {
    let bbo = SellmeierSet::bbo();
    let omega_s = units::wavelength_to_omega(1550e-9);

    // Continuity and finiteness of sigma(alpha), and the matching residual.
    let mut continuous = true;
    let mut residual_ok = true;
    let mut last: Option<f64> = None;
    for i in 0..=100 {
        let alpha = 0.25 * i as f64 / 100.0;
        let spec = CrystalSpec::degenerate_775(0.01, 1e-4, alpha).unwrap();
        let est = effective_sigma(&bbo, &spec, DetuningConvention::SignalOnly).unwrap();
        if !(est.sigma.is_finite() && est.sigma > 0.0) {
            continuous = false;
        }
        if let Some(prev) = last {
            if ((est.sigma / prev) as f64 - 1.0).abs() > 0.2 {
                continuous = false;
            }
        }
        last = Some(est.sigma);
        let k_s = omega_s * bbo.index_ordinary(1550e-9).unwrap() / units::SPEED_OF_LIGHT;
        let k_sx = k_s * alpha.sin();
        let dk = phase_mismatch(&bbo, omega_s, omega_s, k_sx, -k_sx, est.theta).unwrap();
        if dk.abs() >= 1e-3 {
            residual_ok = false;
        }
    }

    // Orderings in crystal length and mode width at a fixed angle.
    let sig = |l: f64, wf: f64| {
        effective_sigma(
            &bbo,
            &CrystalSpec::degenerate_775(l, wf, 0.1).unwrap(),
            DetuningConvention::SignalOnly,
        )
        .unwrap()
        .sigma
    };
    let orderings = sig(0.01, 1e-4) < sig(0.001, 1e-4) && sig(0.01, 1e-3) < sig(0.01, 1e-5);

    // Finite-difference convergence under step halving.
    let mut fd_ok = true;
    for alpha in [0.0, 0.12, 0.22] {
        let spec = CrystalSpec::degenerate_775(0.01, 1e-4, alpha).unwrap();
        let s1 = effective_sigma_with_step(&bbo, &spec, DetuningConvention::SignalOnly, 1e-6)
            .unwrap()
            .sigma;
        let s2 = effective_sigma_with_step(&bbo, &spec, DetuningConvention::SignalOnly, 5e-7)
            .unwrap()
            .sigma;
        if (s1 / s2 - 1.0).abs() >= 1e-4 {
            fd_ok = false;
        }
    }

    // The matching angle itself solves the collinear condition.
    let theta =
        phase_matching_angle(&bbo, &CrystalSpec::degenerate_775(0.01, 1e-4, 0.0).unwrap()).unwrap();
    report(
        12,
        continuous && residual_ok && orderings && fd_ok,
        &format!(
            "sigma(alpha) continuous and finite over [0, 0.25] rad, |mismatch| < 1e-3 1/m \
             (collinear theta = {:.4} rad), length/mode-width orderings hold, \
             finite differences converged",
            theta
        ),
    );
}
