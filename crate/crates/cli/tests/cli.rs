//! End-to-end tests of the `dispcomp` binary: artifact emission, exit
//! codes, overrides, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dispcomp(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispcomp"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON receipt")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_artifact(dir: &Path, name: &str) {
    let path = dir.join(name);
    let metadata =
        fs::metadata(&path).unwrap_or_else(|_| panic!("{name} missing in {}", dir.display()));
    assert!(metadata.len() > 0, "{name} is empty");
}

#[test]
fn every_subcommand_writes_its_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();

    let pulse = dispcomp(&["pulse"], out);
    assert_eq!(exit_code(&pulse), 0, "{}", stderr_text(&pulse));
    assert_artifact(out, "pulse.csv");

    let compensate = dispcomp(&["compensate"], out);
    assert_eq!(exit_code(&compensate), 0, "{}", stderr_text(&compensate));
    assert_artifact(out, "precompensated.csv");
    assert_artifact(out, "modulator.csv");

    let hom = dispcomp(&["hom"], out);
    assert_eq!(exit_code(&hom), 0, "{}", stderr_text(&hom));
    assert_artifact(out, "hom_curve.csv");
    assert_artifact(out, "hom_summary.json");

    let curve = out.join("hom_curve.csv");
    let estimate = dispcomp(&["estimate", "--curve", curve.to_str().unwrap()], out);
    assert_eq!(exit_code(&estimate), 0, "{}", stderr_text(&estimate));
    assert_artifact(out, "estimate.json");

    let protocol = dispcomp(&["protocol"], out);
    assert_eq!(exit_code(&protocol), 0, "{}", stderr_text(&protocol));
    assert_artifact(out, "protocol_report.json");
    assert_artifact(out, "protocol_table.txt");

    let keyrate = dispcomp(&["keyrate", "--length-max-km", "20", "--step-km", "5"], out);
    assert_eq!(exit_code(&keyrate), 0, "{}", stderr_text(&keyrate));
    assert_artifact(out, "keyrate_sweep.csv");

    // Each receipt lists exactly the files it wrote, and they all exist.
    let receipt = stdout_json(&hom);
    assert_eq!(receipt["command"], "hom");
    let outputs = receipt["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for path in outputs {
        assert!(Path::new(path.as_str().unwrap()).exists());
    }
}

#[test]
fn csv_headers_match_the_documented_formats() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    dispcomp(&["pulse"], out);
    dispcomp(&["compensate"], out);
    dispcomp(&["hom"], out);
    dispcomp(&["keyrate", "--length-max-km", "4", "--step-km", "2"], out);

    let first_line = |name: &str| -> String {
        let text = fs::read_to_string(out.join(name)).unwrap();
        text.lines().next().unwrap_or_default().to_string()
    };
    assert_eq!(first_line("pulse.csv"), "t_ps,re,im,mag,phase_rad");
    assert_eq!(first_line("precompensated.csv"), "t_ps,re,im,mag,phase_rad");
    assert_eq!(first_line("modulator.csv"), "t_ps,intensity_norm,phase_rad");
    assert_eq!(first_line("hom_curve.csv"), "delay_ps,coincidence_norm");
    assert_eq!(
        first_line("keyrate_sweep.csv"),
        "length_km,skr_uncompensated,skr_compensated,visibility_uncompensated,e11x_uncompensated"
    );
}

#[test]
fn invalid_config_values_exit_two_with_the_key_path() {
    let dir = TempDir::new().unwrap();
    let config_path = dir.path().join("config.json");
    fs::write(&config_path, r#"{"system":{"t0_ps":-5}}"#).unwrap();
    let output = dispcomp(
        &["pulse", "--config", config_path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 2);
    assert!(
        stderr_text(&output).contains("system.t0_ps"),
        "stderr: {}",
        stderr_text(&output)
    );
}

#[test]
fn unknown_config_keys_exit_two() {
    let dir = TempDir::new().unwrap();
    let config_path = dir.path().join("config.json");
    fs::write(&config_path, r#"{"system":{"t0_sp":20}}"#).unwrap();
    let output = dispcomp(
        &["pulse", "--config", config_path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 2);
    assert!(
        stderr_text(&output).contains("t0_sp"),
        "stderr: {}",
        stderr_text(&output)
    );
}

#[test]
fn set_overrides_show_up_in_the_receipt() {
    let dir = TempDir::new().unwrap();
    let output = dispcomp(&["pulse", "--set", "system.t0_ps=10"], dir.path());
    assert_eq!(exit_code(&output), 0);
    let receipt = stdout_json(&output);
    assert_eq!(receipt["inputs"]["system"]["t0_ps"], 10.0);
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = TempDir::new().unwrap();
    let output = dispcomp(
        &[
            "hom",
            "--set",
            "sim.counts_per_bin=1e5",
            "--set",
            "sim.seed=1",
            "--seed",
            "9",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let receipt = stdout_json(&output);
    assert_eq!(receipt["inputs"]["sim"]["seed"], 9);
}

#[test]
fn noisy_run_without_seed_exits_two() {
    let dir = TempDir::new().unwrap();
    let output = dispcomp(&["hom", "--set", "sim.counts_per_bin=1e5"], dir.path());
    assert_eq!(exit_code(&output), 2);
    assert!(
        stderr_text(&output).contains("seed"),
        "stderr: {}",
        stderr_text(&output)
    );
}

#[test]
fn super_ceiling_curve_exits_three() {
    let dir = TempDir::new().unwrap();
    let curve_path = dir.path().join("curve.csv");
    // A clean dip whose depth implies visibility 0.6 — beyond the source
    // ceiling, so no asymmetry is consistent with it.
    let mut text = String::from("delay_ps,coincidence_norm\n");
    for step in -64..=64 {
        let delay = f64::from(step) * 5.0;
        let value = 1.0 - 0.6 * (-(delay / 40.0).powi(2)).exp();
        text.push_str(&format!("{delay},{value}\n"));
    }
    fs::write(&curve_path, text).unwrap();
    let output = dispcomp(
        &["estimate", "--curve", curve_path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 3, "{}", stderr_text(&output));
    assert!(
        stderr_text(&output).contains("ceiling"),
        "stderr: {}",
        stderr_text(&output)
    );
}

#[test]
fn malformed_curve_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let curve_path = dir.path().join("curve.csv");
    fs::write(&curve_path, "delay,coincidence\n0,1\n").unwrap();
    let output = dispcomp(
        &["estimate", "--curve", curve_path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn protocol_on_the_default_link_selects_bob() {
    let dir = TempDir::new().unwrap();
    let output = dispcomp(&["protocol"], dir.path());
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("protocol_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["selected"], "bob");
    assert!((report["alpha_hat_ps2"].as_f64().unwrap() - 1200.0).abs() < 2.0);
    let table = fs::read_to_string(dir.path().join("protocol_table.txt")).unwrap();
    assert!(table.contains("selected: bob"), "table: {table}");
}

#[test]
fn protocol_on_matched_arms_is_inconclusive_and_exits_four() {
    let dir = TempDir::new().unwrap();
    let output = dispcomp(&["protocol", "--set", "fiber_b.length_km=0"], dir.path());
    assert_eq!(exit_code(&output), 4, "{}", stderr_text(&output));
    // The verdict is still written and announced.
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("protocol_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["selected"], "inconclusive");
    let receipt = stdout_json(&output);
    assert!(!receipt["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn estimate_recovers_the_configured_asymmetry() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    dispcomp(&["hom"], out);
    let curve = out.join("hom_curve.csv");
    let output = dispcomp(&["estimate", "--curve", curve.to_str().unwrap()], out);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let estimate: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("estimate.json")).unwrap()).unwrap();
    // The default link accumulates 20 ps²/km × 60 km on Bob's arm.
    let alpha = estimate["alpha_hat_ps2"].as_f64().unwrap();
    assert!((alpha - 1200.0).abs() < 2.0, "alpha_hat {alpha}");
    let candidates = estimate["alpha_candidates_ps2"].as_array().unwrap();
    assert_eq!(candidates[0].as_f64().unwrap(), alpha);
    assert_eq!(candidates[1].as_f64().unwrap(), -alpha);
}

#[test]
fn sweep_csv_compensated_column_dominates_row_wise() {
    let dir = TempDir::new().unwrap();
    let output = dispcomp(&["keyrate"], dir.path());
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let text = fs::read_to_string(dir.path().join("keyrate_sweep.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|cell| cell.parse().unwrap()).collect();
        assert_eq!(cells.len(), 5);
        let (uncompensated, compensated) = (cells[1], cells[2]);
        assert!(
            compensated >= uncompensated,
            "at {} km: {compensated} < {uncompensated}",
            cells[0]
        );
        rows += 1;
    }
    assert_eq!(rows, 61);
}

#[test]
fn fixed_seed_pipelines_are_byte_identical() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    let noisy = ["--set", "sim.counts_per_bin=1e5", "--seed", "7"];

    for dir in [&first, &second] {
        let hom_args: Vec<&str> = ["hom"].iter().chain(&noisy).copied().collect();
        let hom = dispcomp(&hom_args, dir.path());
        assert_eq!(exit_code(&hom), 0, "{}", stderr_text(&hom));
        let protocol_args: Vec<&str> = ["protocol"].iter().chain(&noisy).copied().collect();
        let protocol = dispcomp(&protocol_args, dir.path());
        assert_eq!(exit_code(&protocol), 0, "{}", stderr_text(&protocol));
    }
    for name in [
        "hom_curve.csv",
        "hom_summary.json",
        "protocol_report.json",
        "protocol_table.txt",
    ] {
        let lhs = fs::read(first.path().join(name)).unwrap();
        let rhs = fs::read(second.path().join(name)).unwrap();
        assert_eq!(lhs, rhs, "{name} differs between identical runs");
    }
}
