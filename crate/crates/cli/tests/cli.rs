//! End-to-end tests of the `qsdc` binary: output contracts, exit codes,
//! and determinism.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_qsdc"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).expect("utf8 stdout"),
        String::from_utf8(output.stderr).expect("utf8 stderr"),
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SWEEP_HEADER: &str =
    "attenuation_db,mu,estimator,i_ab,i_ae_1,i_ae_2,i_ae_3plus,c_s,c_s_clamped";

#[test]
fn help_lists_subcommands() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for name in ["capacity-sweep", "simulate", "fringe", "validate-decoy"] {
        assert!(stdout.contains(name), "help lacks {name}");
    }
}

#[test]
fn sweep_emits_contract_csv() {
    let (code, stdout, stderr) = run(&["capacity-sweep", "--mu", "0.01", "--alpha", "0:1:0.5"]);
    assert_eq!(code, 0);
    assert!(!stdout.contains('\r'), "CSV must use LF line endings");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 4, "header plus one row per grid point");
    let mut last_alpha = f64::NEG_INFINITY;
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 9);
        let alpha: f64 = fields[0].parse().unwrap();
        assert!(alpha > last_alpha, "rows must be in grid order");
        last_alpha = alpha;
        assert_eq!(fields[2], "gllp");
        let c_s: f64 = fields[7].parse().unwrap();
        let clamped: f64 = fields[8].parse().unwrap();
        assert_eq!(clamped, c_s.max(0.0));
    }
    assert!(stderr.contains("cutoff mu="), "summary goes to stderr");
}

#[test]
fn sweep_writes_file_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let (code, stdout, _) = run(&[
        "capacity-sweep",
        "--mu",
        "0.01",
        "--alpha",
        "0:0.5:0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with(SWEEP_HEADER));
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.ends_with('\n'));
    assert!(stdout.contains("cutoff mu="), "summary moves to stdout");
}

#[test]
fn sweep_supports_decoy_estimator() {
    let (code, stdout, _) = run(&[
        "capacity-sweep",
        "--estimator",
        "decoy",
        "--mu",
        "0.1",
        "--alpha",
        "0:1:1",
    ]);
    assert_eq!(code, 0);
    for row in stdout.lines().skip(1) {
        assert_eq!(row.split(',').nth(2), Some("decoy"));
    }
}

#[test]
fn two_photon_term_flag_flips_the_sign_at_zero_loss() {
    let included = run(&[
        "capacity-sweep",
        "--mu",
        "0.1",
        "--alpha",
        "0:0:1",
        "--include-two-photon-term",
        "true",
    ]);
    let excluded = run(&[
        "capacity-sweep",
        "--mu",
        "0.1",
        "--alpha",
        "0:0:1",
        "--include-two-photon-term",
        "false",
    ]);
    assert_eq!(included.0, 0);
    assert_eq!(excluded.0, 0);
    let c_s = |stdout: &str| -> f64 {
        stdout
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(7)
            .unwrap()
            .parse()
            .unwrap()
    };
    let with_term = c_s(&included.1);
    let without_term = c_s(&excluded.1);
    assert!(with_term > 0.0, "bounded two-photon leakage keeps capacity positive");
    assert!(without_term < 0.0, "writing two-photon pulses off kills it");
    let clamped: f64 = excluded
        .1
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(8)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(clamped, 0.0);
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, _) = run(&["capacity-sweep", "--estimator", "bogus"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["capacity-sweep", "--alpha", "0:1:0.3"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["capacity-sweep", "--include-two-photon-term", "maybe"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn config_file_feeds_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "{\"mu\": 0.05, \"alpha_stop\": 1.0, \"alpha_step\": 0.5}",
    );
    let (code, stdout, stderr) = run(&["capacity-sweep", "--config", &config, "--echo-config"]);
    assert_eq!(code, 0);
    assert!(stderr.contains("\"mu\": 0.05"), "echo prints the effective config");
    for row in stdout.lines().skip(1) {
        assert_eq!(row.split(',').nth(1), Some("5.00000000e-2"));
    }
}

#[test]
fn broken_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = write_config(dir.path(), "{\"muu\": 0.1}");
    let (code, _, stderr) = run(&["capacity-sweep", "--config", &unknown_key]);
    assert_eq!(code, 2);
    assert!(stderr.contains("invalid config"));
    let bad_value = write_config(dir.path(), "{\"eta_d_a\": 1.5}");
    let (code, _, _) = run(&["capacity-sweep", "--config", &bad_value]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["capacity-sweep", "--config", "/nonexistent/config.json"]);
    assert_eq!(code, 2);
}

#[test]
fn numerical_dead_ends_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // With no dark counts and a fiber thousands of dB long the gain
    // underflows to exactly zero and the error rate is undefined.
    let config = write_config(dir.path(), "{\"y0_a\": 0.0, \"y0_b\": 0.0}");
    let (code, _, stderr) = run(&[
        "capacity-sweep",
        "--config",
        &config,
        "--alpha",
        "7000:7000:1",
    ]);
    assert_eq!(code, 3);
    assert!(stderr.contains("error:"));
}

#[test]
fn simulate_reports_all_rates_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.csv");
    let args = [
        "simulate",
        "--mu",
        "0.01",
        "--pulses",
        "50000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);
    for marker in ["q_ba", "dber", "q_bab", "qber", "aborted=false", "ci95=["] {
        assert!(stdout.contains(marker), "simulate output lacks {marker}");
    }
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("mu,attenuation_db,pulses,seed,aborted,"));
    assert_eq!(csv.lines().count(), 2);
    let (_, again, _) = run(&args);
    assert_eq!(stdout, again, "same seed must reproduce the same session");
}

#[test]
fn aborted_sessions_still_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    // A badly misaligned control interferometer pushes the disturbance
    // far above the 4% abort threshold.
    let config = write_config(dir.path(), "{\"visibility_ba\": 0.8}");
    let (code, stdout, _) = run(&[
        "simulate",
        "--config",
        &config,
        "--pulses",
        "50000",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("aborted=true"));
}

#[test]
fn fringe_emits_metadata_then_table() {
    let (code, stdout, stderr) = run(&["fringe"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[0].starts_with("# v_pi="));
    assert_eq!(lines[1], "voltage_v,counts");
    assert_eq!(lines.len(), 2 + 121, "121 voltage points at the default grid");
    assert!(stderr.contains("recovered visibility 9.94800000e-1"));
    assert!(stderr.contains("2.50000000e0 half-wave periods"));
}

#[test]
fn validate_decoy_exit_codes_follow_the_verdict() {
    let (code, stdout, _) = run(&["validate-decoy", "--mu", "0.1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("result: PASS"));
    // Against mu = 0.08 the same levels break the nu1 <= 3*mu/4 ceiling.
    let (code, stdout, _) = run(&["validate-decoy", "--mu", "0.08"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL nu1 <= 3*mu/4"));
    assert!(stdout.contains("result: FAIL"));
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "{\"mu\": 0.1, \"nu2\": 0.05}");
    let (code, stdout, _) = run(&["validate-decoy", "--config", &config]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL cubic balance"));
}
