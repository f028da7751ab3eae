//! End-to-end runs of the `fockimpl` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockimpl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fockimpl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn chi_example_reports_the_triple() {
    let out = run(&["example", "chi"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["chi_uv"], 1);
    assert_eq!(v["chi_product"], -1);
    assert_eq!(v["chi_v_3pi4"], -1);
    assert_eq!(v["multiplicative"], false);
    assert!(v["composition_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn vphi_lambdas_follow_the_formula() {
    let out = run(&["example", "vphi", "--phi", "-pi/4,0,pi/8,pi/4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["examples"].as_array().expect("one report per angle");
    assert_eq!(rows.len(), 4);
    for r in rows {
        let (a, b) = (r["lambda_formula"].as_f64().unwrap(), r["lambda_measured"].as_f64().unwrap());
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn dirac_csv_is_monotone() {
    let out = run(&["--csv", "dirac", "--n-max-ladder", "64,128,256", "--no-localization"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n_max,m_max,plus_minus,minus_plus,gap_plus_minus,gap_minus_plus"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1][2] > w[0][2] && w[1][3] > w[0][3]);
    }
}

#[test]
fn car_commands_on_sample_data() {
    let out = run(&["car", "analyze", &data("car_vphi.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["index"]["ind"], -2);
    let out = run(&["car", "implement", &data("car_shift_u1.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["charge", &data("car_shift_u1.json"), &data("group_car_u1.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["car", "implement", &data("car_vphi.json")]);
    let b = run(&["car", "implement", &data("car_vphi.json")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_the_report() {
    let path = std::env::temp_dir().join(format!("fockimpl-cli-out-{}.json", std::process::id()));
    let out = run(&["--out", path.to_str().unwrap(), "example", "chi"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["chi_uv"], 1);
    std::fs::remove_file(path).ok();
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(run(&["bogus"]).status.code(), Some(3));
    let bad = scratch("bad.json", "{ not json");
    assert_eq!(run(&["car", "analyze", bad.to_str().unwrap()]).status.code(), Some(3));
    let missing = scratch("dir-marker", "").with_file_name("missing.json");
    assert_eq!(run(&["car", "analyze", missing.to_str().unwrap()]).status.code(), Some(3));
    // a CCR map handed to the CAR commands
    assert_ne!(run(&["car", "analyze", &data("ccr_squeeze.json")]).status.code(), Some(0));
    assert_eq!(run(&["example", "vphi", "--phi", "pi/x"]).status.code(), Some(3));
}

#[test]
fn help_and_version_succeed() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("CSV columns"));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
