//! End-to-end tests of the `spdc` binary: output values, exit codes,
//! deterministic figure files, and the sidecar round trip.

use std::path::Path;
use std::process::{Command, Output};

fn spdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn grab(text: &str, key: &str) -> f64 {
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(key) {
            let value = rest
                .trim_start_matches([' ', '='])
                .split_whitespace()
                .next()
                .unwrap();
            return value.parse().unwrap();
        }
    }
    panic!("no line starting with {key:?} in:\n{text}");
}

#[test]
fn width_defaults_match_closed_forms() {
    let out = spdc(&["width"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let tau_a = grab(&text, "tau_a ");
    let tau_ah = grab(&text, "tau_ah ");
    assert!((tau_a / 5.000_34e-10 - 1.0).abs() < 1e-4, "tau_a = {tau_a}");
    assert!(
        (tau_ah / 1.167_18e-11 - 1.0).abs() < 1e-4,
        "tau_ah = {tau_ah}"
    );
}

#[test]
fn width_optimal_source_on_km_arms_is_4_8_ps() {
    let out = spdc(&[
        "width",
        "--override",
        "source.tau_p.value=4.795832e-12",
        "--override",
        "source.tau_p.unit=s",
        "--override",
        "source.sigma.value=4.170288e11",
        "--override",
        "source.sigma.unit=Hz",
    ]);
    assert!(out.status.success());
    let tau_ah = grab(&stdout(&out), "tau_ah ");
    assert!((tau_ah / 4.80e-12 - 1.0).abs() < 1e-2, "tau_ah = {tau_ah}");
}

#[test]
fn width_zero_length_collapses_to_zero_dispersion_forms() {
    let out = spdc(&[
        "width",
        "--override",
        "channel_a.length.value=0",
        "--override",
        "channel_b.length.value=0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let tau_a = grab(&text, "tau_a ");
    let tau_ah = grab(&text, "tau_ah ");
    // sigma tau_p = 1000: tau_a ~ tau_p/2, tau_ah ~ 2/sigma.
    assert!((tau_a / 5.000_02e-10 - 1.0).abs() < 1e-4);
    assert!((tau_ah / 2e-12 - 1.0).abs() < 1e-4);
}

#[test]
fn width_jitter_negligible_on_long_links() {
    let out = spdc(&[
        "width",
        "--override",
        "channel_a.length.value=100",
        "--override",
        "channel_a.length.unit=km",
        "--override",
        "channel_b.length.value=100",
        "--override",
        "channel_b.length.unit=km",
        "--override",
        "detector_a.jitter.value=100",
        "--override",
        "detector_b.jitter.value=100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let bare = grab(&text, "tau_ah ");
    let jittered = grab(&text, "tau_ah_j");
    let contribution = jittered / bare - 1.0;
    assert!(
        contribution > 0.0 && contribution < 0.01,
        "jitter contribution {contribution:.4} should be under 1%"
    );
}

#[test]
fn optimize_symmetric_and_monotone_regimes() {
    let out = spdc(&["optimize"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("interior minimum"));
    let sym_line = text
        .lines()
        .find(|l| l.starts_with("symmetric joint optimum"))
        .unwrap();
    assert!(sym_line.contains("4.795832e-12"), "{sym_line}");

    // Strongly asymmetric link at 100 GHz: the width only grows with the
    // pump duration.
    let out = spdc(&[
        "optimize",
        "--override",
        "channel_b.length.value=100",
        "--override",
        "source.sigma.value=0.1",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("infimum at tau_p -> 0"));

    // Meter-scale arms: 150 fs pump.
    let out = spdc(&[
        "optimize",
        "--override",
        "channel_a.length.value=1",
        "--override",
        "channel_a.length.unit=m",
        "--override",
        "channel_b.length.value=1",
        "--override",
        "channel_b.length.unit=m",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("symmetric joint optimum"))
        .unwrap();
    assert!(line.contains("1.516575e-13"), "{line}");
}

#[test]
fn figures_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let run = |out: &Path, threads: &str| {
        let st = spdc(&[
            "figure",
            "3a",
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(st.status.success());
    };
    run(&a, "1");
    run(&b, "4");
    let csv_a = std::fs::read(a.join("fig_3a.csv")).unwrap();
    let csv_b = std::fs::read(b.join("fig_3a.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "figure bytes must not depend on thread count");

    // The three curves share the same minimum location: the optimal pump
    // duration in the symmetric case does not depend on the crystal width.
    let text = String::from_utf8(csv_a).unwrap();
    let mut mins = [(f64::INFINITY, 0.0); 3];
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for (k, slot) in mins.iter_mut().enumerate() {
            if v[k + 1] < slot.0 {
                *slot = (v[k + 1], v[0]);
            }
        }
    }
    assert_eq!(mins[0].1, mins[1].1, "minima must align across sigma");
    assert_eq!(mins[1].1, mins[2].1, "minima must align across sigma");
}

#[test]
fn sidecar_round_trip_reproduces_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let st = spdc(&[
        "figure",
        "8a",
        "--out",
        first.to_str().unwrap(),
        "--override",
        "figure.points=11",
        "--override",
        "figure.l_max_km=250",
    ]);
    assert!(st.status.success());
    let meta = first.join("fig_8a.meta.json");
    let st = spdc(&[
        "figure",
        "8a",
        "--config",
        meta.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let csv_a = std::fs::read(first.join("fig_8a.csv")).unwrap();
    let csv_b = std::fs::read(second.join("fig_8a.csv")).unwrap();
    assert_eq!(
        csv_a, csv_b,
        "re-running from the sidecar must reproduce the bytes"
    );
}

#[test]
fn exit_code_2_on_config_errors() {
    // Unknown unit.
    let out = spdc(&["width", "--override", "source.tau_p.unit=hours"]);
    assert_eq!(out.status.code(), Some(2));
    // Wrong dimension.
    let out = spdc(&["width", "--override", "source.tau_p.unit=km"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown figure id.
    let out = spdc(&["figure", "9z"]);
    assert_eq!(out.status.code(), Some(2));
    // Malformed config file.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = spdc(&["width", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_3_on_domain_errors() {
    let out = spdc(&[
        "optimize",
        "--override",
        "channel_a.length.value=0",
        "--override",
        "channel_b.length.value=0",
    ]);
    assert_eq!(out.status.code(), Some(3));

    // Insecure even at zero length: heralding arm far too long.
    let out = spdc(&[
        "qkd-maxdist",
        "--arm",
        "a",
        "--override",
        "channel_b.length.value=300",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_code_4_on_io_errors() {
    let out = spdc(&["width", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(4));
    let out = spdc(&["figure", "3a", "--out", "/proc/no-such-dir/figs"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_fast_passes_and_hooks_fail_cleanly() {
    let out = spdc(&["verify", "--fast"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("all suites passed"));

    // Perturbing the closed form must trip the oracle suite.
    let out = spdc(&[
        "verify",
        "--fast",
        "--suite",
        "oracle",
        "--perturb-heralded",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(5));

    // An undersized forced grid surfaces the aliasing error, not a panic.
    let out = spdc(&[
        "verify",
        "--fast",
        "--suite",
        "oracle",
        "--grid-points",
        "128",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stdout(&out).contains("grid aliasing"));
}

#[test]
fn qkd_rate_reports_metrics() {
    let out = spdc(&[
        "qkd-rate",
        "--override",
        "channel_a.length.value=50",
        "--override",
        "channel_b.length.value=50",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let p = grab(&text, "acceptance probability p_exp");
    let k = grab(&text, "key-rate lower bound");
    assert!(p > 0.0 && p < 1.0);
    assert!(k > 0.0 && k <= p);
}
