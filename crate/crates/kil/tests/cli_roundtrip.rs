//! End-to-end checks of the `kil` binary: exit codes, config-file merging,
//! and the numerical content of emitted tables.

use std::path::Path;
use std::process::{Command, Output};

use kil::kernels::Kernel;

fn kil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kil"))
        .args(args)
        .output()
        .expect("spawn kil")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

// ---------------------------------------------------------------------------
// exit codes
// ---------------------------------------------------------------------------

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exit_code(&kil(&["--help"])), 0);
    assert_eq!(exit_code(&kil(&["rates", "--help"])), 0);
    assert_eq!(exit_code(&kil(&["--version"])), 0);
}

#[test]
fn unknown_flags_exit_two() {
    let out = kil(&["rates", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn malformed_descriptors_exit_two() {
    for args in [
        ["rates", "--kernel", "gaussian"].as_slice(),
        &["rates", "--region", "interval:1,0"],
        &["rates", "--target", "abs-power:"],
        &["rates", "--n", "5..3"],
        &["interp", "--n", "0"],
    ] {
        let out = kil(args);
        assert_eq!(exit_code(&out), 2, "args {args:?}: {:?}", out);
        assert!(!out.stderr.is_empty(), "args {args:?} should explain the rejection");
    }
}

#[test]
fn out_of_range_power_exponents_exit_two() {
    // The admissible range for this kernel is [0, 1.5); 1.5 itself is out.
    let out = kil(&["bernstein", "--theta", "1.5", "--n", "2", "--quad-level", "5"]);
    assert_eq!(exit_code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("1.5"), "stderr should name the offending exponent: {msg}");
}

#[test]
fn non_finite_target_values_exit_three() {
    // |x - 0.25|^{-1} is infinite at the level-2 grid point 0.25.
    let out = kil(&["interp", "--target", "abs-power:-1,0.25", "--n", "2"]);
    assert_eq!(exit_code(&out), 3);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("0.25"), "stderr should name the offending point: {msg}");
}

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

#[test]
fn unknown_config_keys_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kernel=wendland-hat:1\nquad_level=7\n").unwrap();
    let out = kil(&["rates", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("quad_level"), "stderr should name the unknown key: {msg}");
}

#[test]
fn flags_override_config_files_in_the_resolved_comment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    std::fs::write(&cfg, "# study configuration\nkernel=matern-half\ntarget=sin:3\nn=3..5\n")
        .unwrap();
    let out_path = dir.path().join("study.csv");
    let out = kil(&[
        "gram",
        "--config",
        cfg.to_str().unwrap(),
        "--kernel",
        "wendland-hat:1",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
    let table = std::fs::read_to_string(&out_path).unwrap();
    let comment = table.lines().last().unwrap();
    assert!(comment.starts_with("# config: "), "missing comment: {comment}");
    assert!(comment.contains("kernel=wendland-hat:1"), "flag must win: {comment}");
    assert!(comment.contains("target=sin:3"), "file value must survive: {comment}");
    assert!(comment.contains("n=3..5"), "file value must survive: {comment}");
}

// ---------------------------------------------------------------------------
// emitted numbers
// ---------------------------------------------------------------------------

#[test]
fn zero_target_rate_studies_report_the_exact_regime() {
    let out = kil(&["rates", "--target", "zero", "--n", "3..6"]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
    let text = String::from_utf8_lossy(&out.stdout);
    let json_start = text.find('{').expect("summary object on stdout");
    let summary: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(summary["regime"], "exact");
    assert_eq!(summary["beta"], serde_json::Value::Null);
    assert_eq!(summary["target"], "zero");
    // The preceding table shows zero errors at every level.
    for line in text[..json_start].lines().skip(1) {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[5], "0", "l2 error column: {line}");
        assert_eq!(fields[6], "0", "sup error column: {line}");
    }
}

#[test]
fn interpolation_tables_reproduce_a_translate_at_the_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("interp.csv");
    let out = kil(&[
        "interp",
        "--target",
        "kernel-translate:0.375",
        "--n",
        "3",
        "--quad-level",
        "5",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
    let kernel = Kernel::parse("wendland-hat:1", 1).unwrap();
    let table = std::fs::read_to_string(&out_path).unwrap();
    let mut rows = 0;
    for line in table.lines().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let expected = kernel.eval(&[fields[0]], &[0.375]);
        assert!(
            (fields[1] - expected).abs() < 1e-12,
            "row {line}: expected {expected}"
        );
        rows += 1;
    }
    assert_eq!(rows, 32, "one row per quadrature node at level 5");
}

#[test]
fn interp_rejects_multi_level_requests() {
    let out = kil(&["interp", "--n", "3..5"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn density_runs_write_one_file_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("profile.csv");
    let out = kil(&[
        "density",
        "--target",
        "exp",
        "--n",
        "3,4",
        "--nb",
        "4",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
    assert!(!out_path.exists(), "the stem itself is never written");
    for n in [3u32, 4] {
        let per_level = dir.path().join(format!("profile_n{n}"));
        let per_level = Path::new(&per_level).with_extension("csv");
        let table = std::fs::read_to_string(&per_level).unwrap();
        let data_rows = table
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .count();
        assert_eq!(data_rows as u32, (1 << n) * 4, "cells x offsets at level {n}");
    }
}
