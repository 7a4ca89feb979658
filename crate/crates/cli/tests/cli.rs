use std::path::Path;
use std::process::{Command, Output};

fn carleman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carleman"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn out_of_range_parameter_is_a_usage_error() {
    let o = carleman(&["weights", "--case", "Eu-a", "--beta", "5"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("Eu-c"), "{}", stderr(&o));
    assert!(stderr(&o).contains("Usage: carleman weights"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["frobnicate"],
        vec!["catenoid", "--radius", "3"],
        vec!["catenoid", "--n", "three"],
        vec!["catenoid", "--r-end", "2"],
        vec!["verify", "--case", "Eu-b", "--beta", "1.5"],
        vec!["certify", "--case", "Hyp-c", "--beta", "1"],
        vec!["conformal", "--alpha", "power(1)", "--envelope", "exp(-1*r)"],
        vec!["growth", "r^"],
        vec!["cutoff", "--quad-tol", "0"],
    ] {
        let o = carleman(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn certify_writes_a_passing_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = carleman(&["certify", "--case", "Hyp-a", "--beta", "1", "--n", "3", "--tau0", "10", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cert = read_json(&dir.path().join("certificate.json"));
    assert_eq!(cert["command"], "certify");
    assert_eq!(cert["result"]["case_id"], "Hyp-a");
    assert_eq!(cert["result"]["verdict"], true);
    let stages: Vec<&str> = cert["result"]["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(stages, ["sigma_growth", "admissibility", "leading_order", "conditions", "battery"]);
}

#[test]
fn catenoid_writes_profile_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = carleman(&["catenoid", "--n", "3", "--r-end", "14", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("catenoid.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,u_prime,H_minus_u,q"));
    assert!(!csv.contains('\r'));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 100);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]), "u is increasing");
    let rep = read_json(&dir.path().join("catenoid.json"));
    let rate = rep["result"]["fitted_rate"].as_f64().unwrap();
    assert!((rate - 2.0).abs() < 0.02, "{rate}");
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ["verify", "--case", "Eu-a", "--beta", "1", "--no-timing"];
    let o1 = carleman(&[&base[..], &["--jobs", "1", "--out", a.path().to_str().unwrap()]].concat());
    let o2 = carleman(&[&base[..], &["--jobs", "4", "--out", b.path().to_str().unwrap()]].concat());
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    assert_eq!(code(&o2), 0, "{}", stderr(&o2));
    let x = std::fs::read(a.path().join("verify.json")).unwrap();
    let y = std::fs::read(b.path().join("verify.json")).unwrap();
    assert_eq!(x, y);
    assert!(!String::from_utf8(x).unwrap().contains("wall_time_ms\": 1"));

    let c1 = carleman(&["certify", "--case", "Ex-a", "--beta", "0.5", "--no-timing"]);
    let c2 = carleman(&["certify", "--case", "Ex-a", "--beta", "0.5", "--no-timing"]);
    assert_eq!(code(&c1), 0, "{}", stderr(&c1));
    assert_eq!(c1.stdout, c2.stdout);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let o = carleman(&["conformal", "--n", "3", "--envelope", "exp(-0.25*r^2)"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"yamabe_constant\": 1.2500000000000000e-1"), "{text}");
    assert!(text.contains("\"outcome\": \"contradiction\""));
}

#[test]
fn dry_run_validates_without_computing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = carleman(&["certify", "--case", "Hyp-b", "--beta", "3", "--dry-run", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!out.exists());
    let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(plan["command"], "certify");
    assert_eq!(plan["settings"]["tau0"], "10");
    assert!(plan["artifacts"][0].as_str().unwrap().ends_with("certificate.json"));

    let bad = carleman(&["certify", "--case", "Hyp-b", "--beta", "1.5", "--dry-run"]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("Hyp-a"), "{}", stderr(&bad));
}

#[test]
fn every_command_has_a_dry_run() {
    for args in [
        vec!["weights", "--case", "Eu-b", "--gamma", "2"],
        vec!["scan", "--sigma", "sinh()", "--h", "2*power(1)"],
        vec!["verify", "--case", "Hyp-a", "--beta", "1.5"],
        vec!["extended", "--case", "Hyp-a", "--beta", "1"],
        vec!["certify", "--case", "Ex-b", "--beta", "1"],
        vec!["curvature", "--space-form", "-4"],
        vec!["cutoff"],
        vec!["catenoid"],
        vec!["conformal", "--envelope", "exp(-1*r)"],
        vec!["growth", "r^2"],
    ] {
        let o = carleman(&[&args[..], &["--dry-run"]].concat());
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(plan["command"], args[0]);
    }
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.conf");
    std::fs::write(&cfg, "# shared\nseed = 9\n\n[catenoid]\nn = 4\nr_end = 12\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = carleman(&["catenoid", "--config", c, "--n", "5", "--dry-run"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(plan["settings"]["n"], "5");
    assert_eq!(plan["settings"]["r-end"], "12");
    assert_eq!(plan["settings"]["seed"], "9");

    std::fs::write(&cfg, "[catenoid]\nrend = 12\n").unwrap();
    let o = carleman(&["catenoid", "--config", c, "--dry-run"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown config key `rend`"), "{}", stderr(&o));
}

#[test]
fn verdict_failures_exit_1_and_name_the_stage() {
    let o = carleman(&["extended", "--case", "Hyp-a", "--beta", "1", "--lambda", "0"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("stage `extended`"), "{}", stderr(&o));
    assert!(!o.stdout.is_empty(), "the report is still emitted");

    let o = carleman(&["scan", "--case", "Hyp-b", "--beta", "3", "--r-max", "3"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("stage `admissibility`"), "{}", stderr(&o));
}

#[test]
fn growth_compares_and_self_checks() {
    let o = carleman(&["growth", "r^2*exp(r)", "exp(2*r)", "--trials", "300", "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["result"]["comparison"], "a = o(b)");
    assert_eq!(rep["result"]["self_check"]["violations"].as_array().unwrap().len(), 0);
}
