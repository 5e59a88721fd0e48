use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memnet-sim"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

#[test]
fn preset_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sim(&[
        "--preset", "single_pair", "--scenario", "pair_tomography", "--seed", "3", "--samples", "2000",
        "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("bell_fidelity_corrected = "));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["body"]["seed"], 3);
    assert_eq!(report["body"]["samples"], 2000);
    assert!(dir.path().join("counts/pair_eigen.csv").is_file());
}

#[test]
fn config_file_round_trips_through_print_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = sim(&["--preset", "ideal", "--scenario", "two_node_swap", "--print-config"]);
    assert!(o.status.success());
    let path = dir.path().join("ideal.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let out = dir.path().join("run");
    let o = sim(&["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&out).join("sweeps/two_node_swap.csv").is_file());
}

#[test]
fn bad_inputs_exit_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1, \"name\": 5}").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--preset", "ideal", "--scenario", "ghz7", "--out", out],
        vec!["--preset", "nonexistent", "--scenario", "ghz6", "--out", out],
        vec!["--config", bad.to_str().unwrap(), "--scenario", "ghz6", "--out", out],
        vec!["--config", "/nonexistent/cfg.json", "--scenario", "ghz6", "--out", out],
        vec!["--preset", "ideal", "--out", out],
        vec!["--preset", "ideal", "--scenario", "ghz6"],
        vec!["--scenario", "ghz6", "--out", out],
    ];
    for args in cases {
        let o = sim(&args);
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}
