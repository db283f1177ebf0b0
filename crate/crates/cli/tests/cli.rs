use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn singlet_optimal_chsh() {
    let v = json(&lab(&["chsh", "singlet", "--optimal"]));
    assert!((f(&v["value"]) - 2.0 * 2f64.sqrt()).abs() < 1e-8);
    assert_eq!(f(&v["M"]), 2.0);
}

#[test]
fn werner2x2_half_does_not_violate() {
    let v = json(&lab(&["chsh", "werner2x2", "--alpha", "0.5"]));
    assert!((f(&v["M"]) - 0.5).abs() < 1e-10);
    assert!(f(&v["value"]) <= 2.0);
}

#[test]
fn explicit_settings_on_product_state_stay_local() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    // |00><00|
    let mut entries = vec![[0.0, 0.0]; 16];
    entries[0] = [1.0, 0.0];
    let state = serde_json::json!({"dA": 2, "dB": 2, "entries": entries});
    std::fs::write(&path, state.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let v = json(&lab(&[
        "chsh", "--state-file", p, "--x", "0,0,1", "--x2", "1,0,0", "--y", "1,0,1", "--y2", "-1,0,1",
    ]));
    assert!(f(&v["value"]).abs() <= 2.0 + 1e-12);
}

#[test]
fn witness_verdicts() {
    let v = json(&lab(&["witness", "werner-local", "--d", "3"]));
    assert!((f(&v["flip_witness"]) + 5.0 / 9.0).abs() < 1e-11);
    assert_eq!(v["witness_verdict"], "entangled");

    let v = json(&lab(&["witness", "rho-g", "--q", "0.2"]));
    assert!((f(&v["flip_witness"]) - 0.2).abs() < 1e-11);
    assert_eq!(v["witness_verdict"], "witness inconclusive");
    assert!(f(&v["ppt_min_eigenvalue"]) < 0.0);
    assert_eq!(v["ppt_verdict"], "entangled (npt)");

    let v = json(&lab(&["witness", "werner", "--d", "2", "--phi", "0.5"]));
    assert_eq!(v["witness_verdict"], "separable");
}

#[test]
fn missing_parameter_is_invalid_input() {
    let out = lab(&["witness", "werner"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hirsch_beyond_half_is_rejected() {
    let out = lab(&["simulate", "hirsch", "--q", "0.6", "--n", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gd_on_aligned_settings() {
    let v = json(&lab(&["simulate", "gd", "--x", "0,0,1", "--y", "0,0,1", "--n", "2e5"]));
    let e = &v["extra"]["E_AB"];
    assert!((f(&e["mean"]) + 0.5).abs() <= 5.0 * f(&e["stderr"]));
    assert_eq!(v["passed"], true);
}

#[test]
fn werner_simulation_csv() {
    let out = lab(&["simulate", "werner", "--d", "2", "--n", "1e5", "--seed", "7", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,mean,stderr,oracle,abs_diff,sigma_ratio"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn simulation_is_thread_count_independent() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nonlocal-lab"))
            .args(["simulate", "barrett", "--d", "3", "--n", "30000", "--seed", "5"])
            .env("NONLOCAL_LAB_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn filter_scan_approaches_limits() {
    let out = lab(&["filter-scan", "rho-g", "--q", "0.25", "--eps-grid", "1e-3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((row[3] - 2.0 * 1.25f64.sqrt()).abs() < 1e-4);

    let out = lab(&["filter-scan", "rho-g-prime", "--q", "0.5", "--eps-grid", "1e-3", "--format", "json"]);
    let v = json(&out);
    assert!((f(&v[0]["chsh_bound"]) - 2.0 * 1.125f64.sqrt()).abs() < 1e-4);

    let v = json(&lab(&["filter-scan", "popescu", "--d", "5", "--format", "json"]));
    assert!((f(&v[0]["chsh"]) - 2.0203).abs() < 1e-4);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chsh.json");
    let out = lab(&["chsh", "singlet", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(f(&v["value"]), 2.82842712475);
}

#[test]
fn reproduce_small_n_warns_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run = |p: &std::path::Path| lab(&["reproduce", "--out", p.to_str().unwrap(), "--n", "1e3"]);
    let first = run(&a);
    assert!(String::from_utf8_lossy(&first.stderr).contains("underpowered"));
    let second = run(&b);
    assert_eq!(first.status.code(), second.status.code());
    assert!(matches!(first.status.code(), Some(0 | 1)));
    for name in ["report.json", "tables.csv", "summary.txt"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name} differs between runs");
    }
    let report: Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 13);
    assert_eq!(report["config"]["n_barrett"], 10_000);
}
