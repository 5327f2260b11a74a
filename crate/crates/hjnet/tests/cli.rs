//! Drives the installed binary end to end: commands, outputs, exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hjnet"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hjnet-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const NET: &str = r#"{
  "vertices": [{"id": "x"}, {"id": "y"}],
  "edges": [
    {"id": "e", "from": "x", "to": "y",
     "hamiltonian": {"family": "eikonal_power", "exponent": 1.0,
                     "potential": {"constant": 1.0}}}
  ],
  "solver": {"lambda": 1.0, "grid_n": 800}
}"#;

#[test]
fn solve_writes_outputs_and_exits_zero() {
    let dir = workdir("solve");
    let net = dir.join("net.json");
    fs::write(&net, NET).unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["solve", net.to_str().unwrap(), "--lambda", "1.0", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let u: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("U.json")).unwrap()).unwrap();
    let ux = u["vertices"]["x"].as_f64().unwrap();
    assert!((ux - 1.0).abs() < 1e-2);
    let csv = fs::read_to_string(out.join("arcs.csv")).unwrap();
    assert!(csv.starts_with("edge_id,s,u\n"));
    assert!(csv.lines().count() > 800);
    let res: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("residuals.json")).unwrap()).unwrap();
    assert_eq!(res["all_vertices_witnessed"], serde_json::json!(true));
}

#[test]
fn rho_and_beta_print_values() {
    let dir = workdir("rho");
    let net = dir.join("net.json");
    fs::write(&net, NET).unwrap();
    let out = bin()
        .args(["rho", net.to_str().unwrap(), "--edge", "e", "--alpha", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - (1.0 - (-1.0f64).exp())).abs() < 5e-3);

    let out = bin()
        .args([
            "rho",
            net.to_str().unwrap(),
            "--path",
            "e,-e",
            "--alpha",
            "0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - (1.0 - (-2.0f64).exp())).abs() < 5e-3);

    let out = bin()
        .args(["beta", net.to_str().unwrap(), "--cycle", "e,-e"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-2);
}

#[test]
fn aubry_eikonal_and_sweep_emit_reports() {
    let dir = workdir("reports");
    let net = dir.join("net.json");
    fs::write(&net, NET).unwrap();

    let out = bin()
        .args(["aubry", net.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["members"], serde_json::json!(["x", "y"]));

    let out = bin()
        .args(["eikonal", net.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((j["critical_value"].as_f64().unwrap() + 1.0).abs() < 1e-6);

    let sweep_dir = dir.join("sweep");
    let status = bin()
        .args(["sweep", net.to_str().unwrap(), "--lambdas", "0.4,0.2", "-o"])
        .arg(&sweep_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("lambda,vertex,u,in_aubry,gap_to_limit\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}

#[test]
fn selftest_passes() {
    let out = bin()
        .args(["selftest", "--cases", "5", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn validation_and_numerical_exit_codes() {
    let dir = workdir("errors");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = bin()
        .args(["solve", bad.to_str().unwrap(), "-o"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], serde_json::json!("validation"));

    // lambda <= 0 is a validation error for discounted commands
    let net = dir.join("net.json");
    fs::write(&net, NET).unwrap();
    let out = bin()
        .args(["solve", net.to_str().unwrap(), "--lambda", "0", "-o"])
        .arg(dir.join("out2"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // a cycle request that does not close is rejected as bad input
    let out = bin()
        .args(["beta", net.to_str().unwrap(), "--cycle", "e"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
