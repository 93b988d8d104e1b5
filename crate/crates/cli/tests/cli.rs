//! End-to-end tests of the `combrec` binary: exit codes, JSON outputs, the
//! erase/recover pipeline, and sweep determinism.

use std::path::Path;
use std::process::{Command, Output};

use combrec_core::{forward_dft, DiracComb, Grid, LatticeSet, RecoveryStatus, Signal};
use num_complex::Complex64;
use tempfile::TempDir;

fn combrec(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_combrec"));
    command.args(args).env_remove("COMBREC_CAP");
    for (key, value) in envs {
        command.env(key, value);
    }
    command.output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn spike_fixture(dir: &Path) -> (DiracComb, String) {
    let grid = Grid::new(16, 1).unwrap();
    let support = LatticeSet::from_indices(grid, vec![5]).unwrap();
    let comb = DiracComb::build(grid, vec![(Complex64::new(1.0, 0.0), support)], None).unwrap();
    let spectrum = forward_dft(&comb.to_signal());
    let path = write(dir, "spectrum.json", &spectrum.to_json());
    (comb, path)
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(combrec(&["--help"], &[]).status.code(), Some(0));
    assert_eq!(combrec(&["recover", "--help"], &[]).status.code(), Some(0));
    assert_eq!(combrec(&["no-such-command"], &[]).status.code(), Some(2));
    assert_eq!(combrec(&["analyze"], &[]).status.code(), Some(2)); // missing --input
}

#[test]
fn missing_file_is_a_domain_error() {
    let output = combrec(&["analyze", "--input", "/nonexistent/f.json"], &[]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("cannot read"));
}

#[test]
fn analyze_reports_effective_support_and_product() {
    let dir = TempDir::new().unwrap();
    let grid = Grid::new(8, 1).unwrap();
    let f = Signal::indicator(&LatticeSet::from_indices(grid, vec![0, 4]).unwrap());
    let input = write(dir.path(), "f.json", &f.to_json());

    let value = stdout_json(&combrec(&["analyze", "--input", &input, "--p", "2"], &[]));
    assert_eq!(value["gamma"], 1);
    assert_eq!(value["effective"]["support"], serde_json::json!([[0], [4]]));
    // Subgroup indicator: |A_1| = 2, spectrum on the even frequencies, so the
    // product meets the bound N/gamma = 8 exactly.
    assert_eq!(value["sigma_size"], 4);
    assert_eq!(value["product"], 8.0);
    assert_eq!(value["holds"], true);
}

#[test]
fn erase_then_recover_dra_round_trip() {
    let dir = TempDir::new().unwrap();
    let (comb, spectrum_path) = spike_fixture(dir.path());
    let coeffs_path = write(dir.path(), "coeffs.json", r#"{"values": [[1.0, 0.0]]}"#);
    let obs_path = dir.path().join("obs.json").to_string_lossy().into_owned();

    let status = combrec(
        &[
            "erase",
            "--input",
            &spectrum_path,
            "--size",
            "7",
            "--seed",
            "3",
            "--out",
            &obs_path,
        ],
        &[],
    );
    assert!(status.status.success());

    let value = stdout_json(&combrec(
        &["recover", "dra", "--input", &obs_path, "--coeffs", &coeffs_path],
        &[],
    ));
    assert_eq!(value["status"], "recovered");
    let recovered = DiracComb::from_json(&value["result"].to_string()).unwrap();
    assert_eq!(recovered, comb);
    assert_eq!(value["certificate"]["kind"], "rounding");

    // The ls and oracle routes agree on this instance.
    let value =
        stdout_json(&combrec(&["recover", "ls", "--input", &obs_path, "--k", "1"], &[]));
    assert_eq!(value["status"], "recovered");

    let value = stdout_json(&combrec(
        &[
            "recover", "oracle", "--input", &obs_path, "--coeffs", &coeffs_path,
            "--max-gamma", "1",
        ],
        &[],
    ));
    assert_eq!(value["count"], 1);
}

#[test]
fn erase_with_explicit_set_and_total_erasure_error() {
    let dir = TempDir::new().unwrap();
    let (_, spectrum_path) = spike_fixture(dir.path());
    let set_path = write(dir.path(), "s.json", "[[1],[2],[3]]");
    let value = stdout_json(&combrec(
        &["erase", "--input", &spectrum_path, "--set", &set_path],
        &[],
    ));
    assert_eq!(value["erased"], serde_json::json!([[1], [2], [3]]));
    assert_eq!(value["observed"].as_array().unwrap().len(), 13);

    let full: Vec<Vec<usize>> = (0..16).map(|i| vec![i]).collect();
    let full_path = write(dir.path(), "full.json", &serde_json::to_string(&full).unwrap());
    let output = combrec(&["erase", "--input", &spectrum_path, "--set", &full_path], &[]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn combrec_cap_env_bounds_the_oracle() {
    let dir = TempDir::new().unwrap();
    let (_, spectrum_path) = spike_fixture(dir.path());
    let coeffs_path = write(dir.path(), "coeffs.json", r#"{"values": [[1.0, 0.0]]}"#);
    let obs_path = dir.path().join("obs.json").to_string_lossy().into_owned();
    combrec(
        &["erase", "--input", &spectrum_path, "--size", "2", "--seed", "1", "--out", &obs_path],
        &[],
    );

    let output = combrec(
        &["recover", "oracle", "--input", &obs_path, "--coeffs", &coeffs_path, "--max-gamma", "1"],
        &[("COMBREC_CAP", "100")],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("cap"));
}

#[test]
fn restriction_subcommands() {
    let dir = TempDir::new().unwrap();
    let set_path = write(dir.path(), "sigma.json", "[[0],[3],[7]]");

    let value = stdout_json(&combrec(
        &["restriction", "exact", "--n", "16", "--set", &set_path],
        &[],
    ));
    assert_eq!(value["provenance"], "exact");
    let exact = value["C"].as_f64().unwrap();

    let value = stdout_json(&combrec(
        &[
            "restriction", "empirical", "--n", "16", "--set", &set_path,
            "--p", "2", "--q", "2", "--trials", "40", "--seed", "9",
        ],
        &[],
    ));
    assert_eq!(value["provenance"], "empirical-lower-bound");
    assert!(value["C"].as_f64().unwrap() <= exact + 1e-9);
    assert!(value["witness"].is_object());

    let value = stdout_json(&combrec(
        &["restriction", "generic-set", "--n", "16", "--q", "4", "--seed", "5"],
        &[],
    ));
    assert_eq!(value.as_array().unwrap().len(), 4); // ceil(16^(2/4))
}

#[test]
fn sweep_writes_deterministic_outputs() {
    let dir = TempDir::new().unwrap();
    let config = r#"{
        "grid": {"N": 16, "d": 1},
        "family": {"coefficients": [[1.0, 0.0]], "gamma": 1, "part_size": 1},
        "erasure": {"model": "random-uniform", "sizes": [2, 5, 9]},
        "p": 1.0,
        "variant": "dra-linear",
        "algorithm": "dra",
        "trials": 10,
        "seed": 31
    }"#;
    let config_path = write(dir.path(), "config.json", config);
    let csv_path = dir.path().join("out.csv").to_string_lossy().into_owned();
    let plot_path = dir.path().join("plot.csv").to_string_lossy().into_owned();
    let svg_path = dir.path().join("plot.svg").to_string_lossy().into_owned();

    let run = |csv: &str| {
        let output = combrec(
            &[
                "sweep", "--config", &config_path, "--out", csv,
                "--plot", &plot_path, "--svg", &svg_path,
            ],
            &[],
        );
        assert!(output.status.success());
        let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
        assert_eq!(summary["trials"], 30);
        std::fs::read_to_string(csv).unwrap()
    };
    let first = run(&csv_path);
    let second = run(&csv_path);
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 31);

    let records = combrec_core::harness::parse_csv(&first).unwrap();
    assert_eq!(records.len(), 30);
    for record in &records {
        if record.condition_holds {
            assert_eq!(record.status, RecoveryStatus::Recovered);
        }
    }
    let plot = std::fs::read_to_string(&plot_path).unwrap();
    assert!(plot.starts_with("S_size,"));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));

    // Invalid config is a domain error.
    let bad_path = write(dir.path(), "bad.json", "{\"grid\": {\"N\": 1, \"d\": 1}}");
    let output = combrec(&["sweep", "--config", &bad_path, "--out", &csv_path], &[]);
    assert_eq!(output.status.code(), Some(1));
}
