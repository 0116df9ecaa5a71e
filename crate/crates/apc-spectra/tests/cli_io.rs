//! End-to-end checks of the command-line surface: determinism, file
//! round-trips, output schemas and exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apc-spectra"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_rows(stdout: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(stdout)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1) // column header
        .map(str::to_owned)
        .collect()
}

#[test]
fn simulate_is_byte_identical_across_reruns() {
    let args = ["simulate", "--model", "pma1:T=4", "--n", "720", "--seed", "1"];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# model=pma1:T=4\n"));
    assert!(text.contains("# seed=1\n"));
    let samples: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(samples.len(), 720);
}

#[test]
fn estimate_round_trips_through_a_series_file() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.txt");
    run_ok(&[
        "simulate", "--model", "pma1:T=4", "--n", "400", "--seed", "9",
        "--out", series.to_str().unwrap(),
    ]);

    // Estimates computed from the round-tripped file must equal estimates
    // computed from an in-process simulation bit for bit: the series file
    // stores full-precision decimal samples.
    let from_file = run_ok(&[
        "estimate", "--input", series.to_str().unwrap(),
        "--lambda", "pi/2", "--grid", "24",
    ]);
    let from_model = run_ok(&[
        "estimate", "--model", "pma1:T=4", "--n", "400", "--seed", "9",
        "--lambda", "pi/2", "--grid", "24",
    ]);
    let rows_file = data_rows(&from_file.stdout);
    let rows_model = data_rows(&from_model.stdout);
    assert_eq!(rows_file.len(), 24);
    assert_eq!(rows_file, rows_model);
}

#[test]
fn estimate_full_grid_has_g_squared_rows() {
    let out = run_ok(&["estimate", "--model", "ma2", "--n", "200", "--seed", "3", "--grid", "10"]);
    assert_eq!(data_rows(&out.stdout).len(), 100);
}

#[test]
fn scan_writes_the_full_off_diagonal_grid() {
    let out = run_ok(&[
        "scan", "--model", "ma2", "--n", "200", "--seed", "7", "--grid", "12",
        "--method", "chi2", "--alpha", "0.01", "--threads", "2",
    ]);
    let rows = data_rows(&out.stdout);
    assert_eq!(rows.len(), 12 * 11);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8, "schema s,t,nu,omega,statistic,critical,reject,status");
        assert!(fields[7] == "ok" || fields[7] == "undetermined");
    }
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# method=chi2"));
    assert!(text.contains("# alpha=0.01"));
    assert!(text.contains("# seed=7"));
}

#[test]
fn scan_json_format_carries_config_and_rows() {
    let out = run_ok(&[
        "scan", "--model", "ma2", "--n", "200", "--seed", "7", "--grid", "8",
        "--method", "subs-p", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8 * 7);
    assert!(doc["config"].as_array().unwrap().iter().any(|kv| kv[0] == "method"));
}

#[test]
fn ci_sweeps_the_frequency_grid() {
    let out = run_ok(&[
        "ci", "--model", "pma1:T=4", "--n", "500", "--seed", "2",
        "--lambda", "pi/2", "--conf", "0.95", "--grid", "120",
    ]);
    let rows = data_rows(&out.stdout);
    assert_eq!(rows.len(), 120);
    for row in rows {
        let fields: Vec<f64> = row
            .split(',')
            .map(|f| f.parse::<f64>().unwrap())
            .collect();
        // k, nu, truth, estimate, lo, hi, clamped
        assert_eq!(fields.len(), 7);
        let (truth, lo, hi) = (fields[2], fields[4], fields[5]);
        assert!(lo <= hi && lo >= 0.0);
        assert!(truth.is_finite());
    }
}

#[test]
fn config_errors_exit_with_code_2() {
    // Unknown model.
    let out = bin()
        .args(["simulate", "--model", "arma:1", "--n", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unreadable input file.
    let out = bin()
        .args(["estimate", "--input", "/nonexistent/series.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Non-finite sample in the input.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1.0\nNaN\n2.0\n").unwrap();
    let out = bin()
        .args(["estimate", "--input", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Missing --n with --model.
    let out = bin()
        .args(["simulate", "--model", "ma2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_degeneracy_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.txt");
    let zeros = "0.0\n".repeat(400);
    std::fs::write(&flat, zeros).unwrap();
    // A coherence CI on an all-zero series hits degenerate denominators.
    let out = bin()
        .args([
            "ci", "--input", flat.to_str().unwrap(), "--target", "gamma",
            "--lambda", "pi/2", "--conf", "0.95", "--grid", "12",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // The magnitude CI on the same zeros is a well-defined point interval.
    let out = bin()
        .args([
            "ci", "--input", flat.to_str().unwrap(), "--lambda", "pi/2",
            "--conf", "0.95", "--grid", "12",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());

    // Invalid bandwidth overrides are configuration errors, not degeneracy.
    let out = bin()
        .args([
            "scan", "--input", flat.to_str().unwrap(), "--grid", "6",
            "--method", "subs-gamma", "--Ln", "600",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn window_flag_selects_the_taper() {
    let a = run_ok(&[
        "estimate", "--model", "ma2", "--n", "300", "--seed", "5",
        "--lambda", "0", "--grid", "12", "--window", "truncated",
    ]);
    let b = run_ok(&[
        "estimate", "--model", "ma2", "--n", "300", "--seed", "5",
        "--lambda", "0", "--grid", "12", "--window", "trapezoid:0.5",
    ]);
    assert_ne!(data_rows(&a.stdout), data_rows(&b.stdout));
    let out = bin()
        .args(["estimate", "--model", "ma2", "--n", "300", "--window", "hann"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subcommand_reports_oracle_battery() {
    let out = run_ok(&["verify", "--replicates", "200", "--seed", "4"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("estimator-equivalence-worst-of-200: PASS"));
    assert!(text.contains("kernel-vs-mc-point-0-var-re: PASS"));
    assert!(text.contains("comparisons passed"));
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn series_files_round_trip_start_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("offset.txt");
    std::fs::write(&path, "# start_index=17\n0.5\n-1.25\n3.75\n").unwrap();
    // The estimate honors absolute indexing; shifting start_index changes
    // phases, so outputs must differ from the zero-offset version.
    let shifted = run_ok(&["estimate", "--input", path.to_str().unwrap(), "--lambda", "pi/2", "--grid", "6", "--Ln", "1"]);
    std::fs::write(&path, "0.5\n-1.25\n3.75\n").unwrap();
    let zeroed = run_ok(&["estimate", "--input", path.to_str().unwrap(), "--lambda", "pi/2", "--grid", "6", "--Ln", "1"]);
    assert_ne!(data_rows(&shifted.stdout), data_rows(&zeroed.stdout));
}
