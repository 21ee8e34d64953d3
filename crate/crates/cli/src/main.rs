//! `spdc`: temporal widths of dispersed photon pairs, source optimization,
//! crystal phase-matching width estimates, and BB84 link budgets.
//!
//! Exit codes: 0 ok, 2 configuration, 3 domain, 4 I/O, 5 verification.

mod config;
mod figures;
mod verify;

use clap::{Parser, Subcommand};
use spdc_core::analytic::{
    case_boundaries, optimal_pump_fixed_crystal, symmetric_full_optimum, tau_a_low, PumpRegime,
};
use spdc_core::crystal::{effective_sigma, DetuningConvention};
use spdc_core::numeric::full_optimum_2d;
use spdc_core::qkd::{
    self, accumulated_dispersions, link_widths, max_security_distance, optimize_windows, Arm,
    SourcePolicy,
};
use spdc_core::units;

use config::ScenarioConfig;

/// Error with the exit-code category it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
    pub fn config_from(e: spdc_core::Error) -> Self {
        Self::config(e.to_string())
    }
    pub fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
    pub fn domain_from(e: spdc_core::Error) -> Self {
        Self::domain(e.to_string())
    }
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "spdc",
    version,
    about = "Photon-pair temporal widths and QKD link budgets"
)]
struct Cli {
    /// Scenario configuration file (JSON); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out: std::path::PathBuf,
    /// Override a config value on a dotted JSON path, e.g.
    /// `channel_a.length.value=50`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Temporal widths of both arms for the configured scenario.
    Width,
    /// Analytic and numeric optimization of the source for the scenario.
    Optimize,
    /// Write one of the predefined sweep tables (CSV + JSON sidecar).
    Figure {
        /// One of: 3a 3b 4a 4b 5 6 7 8a 8b.
        id: String,
    },
    /// Effective phase-matching width of the configured crystal.
    CrystalSigma,
    /// Key-rate metrics with optimized detection windows.
    QkdRate,
    /// Maximum security distance of the configured link.
    QkdMaxdist {
        /// Which arm length varies: a, b, or both (symmetric).
        #[arg(long, default_value = "both")]
        arm: String,
        /// Source policy: fixed, pump, full, or pump-keyrate.
        #[arg(long, default_value = "fixed")]
        policy: String,
    },
    /// Run the numerical verification suites.
    Verify {
        /// Which suite: all, oracle, classify, montecarlo.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for the randomized draws.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Smaller, faster variants of each suite.
        #[arg(long)]
        fast: bool,
        /// Force the dense oracle grid to this many points per axis.
        #[arg(long)]
        grid_points: Option<usize>,
        /// Sensitivity canary: perturb the closed form by this relative
        /// amount inside the oracle comparison (the suite must then fail).
        #[arg(long, default_value_t = 0.0, hide = true)]
        perturb_heralded: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore failure: the pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match &cli.command {
        Command::Width => cmd_width(&cfg),
        Command::Optimize => cmd_optimize(&cfg),
        Command::Figure { id } => {
            let path = figures::render(id, &cfg, &cli.out)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::CrystalSigma => cmd_crystal_sigma(&cfg),
        Command::QkdRate => cmd_qkd_rate(&cfg),
        Command::QkdMaxdist { arm, policy } => cmd_qkd_maxdist(&cfg, arm, policy),
        Command::Verify {
            suite,
            seed,
            fast,
            grid_points,
            perturb_heralded,
        } => {
            let suite = verify::Suite::parse(suite)
                .ok_or_else(|| CliError::config(format!("unknown suite {suite:?}")))?;
            let ok = verify::run(&verify::VerifyOptions {
                suite,
                seed: *seed,
                fast: *fast,
                grid_points: *grid_points,
                perturb_heralded: *perturb_heralded,
            });
            if ok {
                Ok(())
            } else {
                Err(CliError {
                    code: 5,
                    message: "verification failed".into(),
                })
            }
        }
    }
}

fn cmd_width(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let s = cfg.to_scenario()?;
    let (d_a, d_b) = accumulated_dispersions(&s);
    let w = link_widths(&s);
    println!("accumulated dispersion: D_A = {d_a:.6e} s^2, D_B = {d_b:.6e} s^2");
    println!(
        "tau_a  = {:.6e} s  (unheralded, arm A)",
        spdc_core::temporal::tau_unheralded(&s.source, d_a)
    );
    println!(
        "tau_b  = {:.6e} s  (unheralded, arm B)",
        spdc_core::temporal::tau_unheralded(&s.source, d_b)
    );
    println!(
        "tau_ah = {:.6e} s  (heralded, arm A)",
        spdc_core::temporal::tau_heralded(&s.source, d_a, d_b)
    );
    println!(
        "tau_bh = {:.6e} s  (heralded, arm B)",
        spdc_core::temporal::tau_heralded(&s.source, d_b, d_a)
    );
    if s.detector_a.jitter > 0.0 || s.detector_b.jitter > 0.0 {
        println!(
            "with detector jitter ({:.3e} s / {:.3e} s):",
            s.detector_a.jitter, s.detector_b.jitter
        );
        println!("tau_a_j  = {:.6e} s", w.tau_a);
        println!("tau_b_j  = {:.6e} s", w.tau_b);
        println!("tau_ah_j = {:.6e} s", w.tau_ah);
        println!("tau_bh_j = {:.6e} s", w.tau_bh);
    }
    println!(
        "sigma = {:.6e} 1/s (~{:.4} nm at 1550 nm)",
        s.source.sigma,
        units::sigma_to_bandwidth_m(s.source.sigma, 1550e-9) * 1e9
    );
    Ok(())
}

fn cmd_optimize(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let s = cfg.to_scenario()?;
    let (d_a, d_b) = accumulated_dispersions(&s);
    if d_a == 0.0 && d_b == 0.0 {
        return Err(CliError::domain(
            "both arms are dispersion-free; widths are monotone in the pump duration",
        ));
    }
    println!("accumulated dispersion: D_A = {d_a:.6e} s^2, D_B = {d_b:.6e} s^2");

    if d_a != 0.0 {
        let (tp, w) = tau_a_low(d_a, s.source.sigma).map_err(CliError::domain_from)?;
        println!("unheralded arm A: optimal tau_p = {tp:.6e} s, width {w:.6e} s");
    }

    if d_a < 0.0 && d_b < 0.0 {
        let opt =
            optimal_pump_fixed_crystal(d_a, d_b, s.source.sigma).map_err(CliError::domain_from)?;
        match opt.regime {
            PumpRegime::InteriorMinimum => println!(
                "heralded arm A at sigma = {:.4e} 1/s: interior minimum, tau_p* = {:.6e} s, width {:.6e} s",
                s.source.sigma,
                opt.tau_p_star.unwrap(),
                opt.tau_ah_at_optimum
            ),
            PumpRegime::InfimumAtZero => println!(
                "heralded arm A at sigma = {:.4e} 1/s: no interior minimum, width grows with the pump; infimum at tau_p -> 0, limit {:.6e} s",
                s.source.sigma, opt.tau_ah_at_optimum
            ),
            PumpRegime::InfimumAtInfinity => println!(
                "heralded arm A at sigma = {:.4e} 1/s: no interior minimum, width falls with the pump; infimum at tau_p -> infinity, limit {:.6e} s",
                s.source.sigma, opt.tau_ah_at_optimum
            ),
        }
        let cb = case_boundaries(d_a, d_b).map_err(CliError::domain_from)?;
        if let Some((lo, hi)) = cb.increasing_band {
            println!("  monotone-increasing sigma band: [{lo:.4e}, {hi:.4e}] 1/s");
        }
        if let Some((lo, hi)) = cb.decreasing_band {
            println!("  monotone-decreasing sigma band: [{lo:.4e}, {hi:.4e}] 1/s");
        }
    }

    if d_a != 0.0 && (d_a - d_b).abs() <= 1e-9 * d_a.abs() {
        let sym = symmetric_full_optimum(d_a).map_err(CliError::domain_from)?;
        println!(
            "symmetric joint optimum: tau_p = {:.6e} s, sigma = {:.6e} 1/s, width {:.6e} s",
            sym.tau_p, sym.sigma, sym.tau_ah
        );
    }

    let num = full_optimum_2d(d_a, d_b).map_err(CliError::domain_from)?;
    println!(
        "numeric joint optimum: tau_p = {:.6e} s, sigma = {:.6e} 1/s, width {:.6e} s{}",
        num.tau_p,
        num.sigma,
        num.value,
        if num.boundary_hit {
            " (search-boundary hit)"
        } else {
            ""
        }
    );
    if d_a != 0.0 && (d_a - d_b).abs() <= 1e-9 * d_a.abs() {
        let sym = symmetric_full_optimum(d_a).map_err(CliError::domain_from)?;
        println!(
            "analytic/numeric agreement: tau_p {:+.3e}, sigma {:+.3e}, width {:+.3e} (relative)",
            num.tau_p / sym.tau_p - 1.0,
            num.sigma / sym.sigma - 1.0,
            num.value / sym.tau_ah - 1.0
        );
    }
    Ok(())
}

fn cmd_crystal_sigma(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let (set, spec) = cfg.to_crystal()?;
    let est = effective_sigma(&set, &spec, DetuningConvention::SignalOnly)
        .map_err(CliError::domain_from)?;
    println!(
        "crystal: {} (L = {:.4e} m, W_f = {:.4e} m, alpha = {:.4} rad)",
        set.name, spec.length, spec.mode_width, spec.emission_angle
    );
    println!(
        "phase-matching angle theta = {:.6} rad ({:.3} deg)",
        est.theta,
        est.theta.to_degrees()
    );
    println!("d(mismatch)/d(k_sx)   = {:.6e}", est.delta_k);
    println!("d(mismatch)/d(omega)  = {:.6e} s/m", est.delta_omega);
    println!(
        "effective sigma = {:.6e} 1/s (~{:.4} nm at 1550 nm)",
        est.sigma,
        units::sigma_to_bandwidth_m(est.sigma, 1550e-9) * 1e9
    );
    Ok(())
}

fn cmd_qkd_rate(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let s = cfg.to_scenario()?;
    let configured = qkd::key_rate(&s, s.detector_a.window_factor, s.detector_b.window_factor)
        .map_err(CliError::domain_from)?;
    let w = optimize_windows(&s).map_err(CliError::domain_from)?;
    println!(
        "transmittance: T_A = {:.6e}, T_B = {:.6e}",
        qkd::transmittance(&s.channel_a),
        qkd::transmittance(&s.channel_b)
    );
    println!(
        "at configured windows (xi_A = {:.4}, xi_B = {:.4}): key rate {:.6e}",
        configured.xi_a, configured.xi_b, configured.key_rate
    );
    println!(
        "optimized windows: xi_A = {:.4}, xi_B = {:.4}{}",
        w.metrics.xi_a,
        w.metrics.xi_b,
        if w.boundary_hit {
            " (box boundary)"
        } else {
            ""
        }
    );
    println!("acceptance probability p_exp = {:.6e}", w.metrics.p_exp);
    println!("QBER = {:.6e}", w.metrics.qber);
    println!(
        "key-rate lower bound = {:.6e} per emitted pair{}",
        w.metrics.key_rate,
        if w.insecure { " (insecure)" } else { "" }
    );
    Ok(())
}

fn cmd_qkd_maxdist(cfg: &ScenarioConfig, arm: &str, policy: &str) -> Result<(), CliError> {
    let s = cfg.to_scenario()?;
    let arm = match arm {
        "a" => Arm::A,
        "b" => Arm::B,
        "both" => Arm::BothSymmetric,
        other => {
            return Err(CliError::config(format!(
                "unknown arm {other:?}: use a, b, or both"
            )))
        }
    };
    let policy = match policy {
        "fixed" => SourcePolicy::Fixed,
        "pump" => SourcePolicy::PumpWidthOptimal,
        "full" => SourcePolicy::FullWidthOptimal,
        "pump-keyrate" => SourcePolicy::PumpKeyRateOptimal,
        other => {
            return Err(CliError::config(format!(
                "unknown policy {other:?}: use fixed, pump, full, or pump-keyrate"
            )))
        }
    };
    let dist = max_security_distance(&s, arm, policy).map_err(CliError::domain_from)?;
    println!(
        "maximum security distance: {dist:.1} m ({:.3} km)",
        dist / 1e3
    );
    Ok(())
}
