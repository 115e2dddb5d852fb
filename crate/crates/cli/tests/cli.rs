// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_electrodiffusion"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV as floats (booleans as 0/1, empty as NaN).
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| match v {
                    "true" => 1.0,
                    "false" => 0.0,
                    "" => f64::NAN,
                    _ => v.parse().unwrap(),
                })
                .collect()
        })
        .collect();
    (header, rows)
}

const FIG4: [&str; 14] = [
    "solve", "--bc", "radiation", "--cinf-left", "0.3333333333333333", "--cinf-right", "0.6666666666666666",
    "--lambda", "0.7", "--alpha-plus", "0.4", "--j0", "0.16", "--full-domain",
];

#[test]
fn neutral_solve_writes_decreasing_positive_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--c0", "0.3333333333333333", "--c1", "0.6666666666666666", "--lambda", "0.5", "--alpha-plus", "0.8", "--out", "fig2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("fig2.csv"));
    assert_eq!(header, ["x", "c_plus", "c_minus", "E"]);
    assert_eq!(rows.len(), 401);
    assert!(rows.iter().all(|r| r[3] > 0.0));
    assert!(rows.windows(2).all(|w| w[1][3] < w[0][3]));
    let doc = json(&dir.path().join("fig2.json"));
    assert_eq!(doc["schema"], "electrodiffusion.solve.v1");
    let r = &doc["result"];
    assert_eq!(r["converged"], true);
    assert_eq!(r["field_monotonicity"], "strictly_decreasing");
    let theta = r["invariants"]["theta"].as_f64().unwrap();
    assert!((theta - r["a_plus"].as_f64().unwrap() - r["a_minus"].as_f64().unwrap()).abs() < 1e-15);
    assert_eq!(doc["config"]["params"]["alpha_plus"], 0.8);
    assert!(dir.path().join("fig2.run.json").exists());
}

#[test]
fn radiation_full_domain_writes_three_continuous_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = FIG4.to_vec();
    args.extend(["--out", "fig4"]);
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, left) = csv(&dir.path().join("fig4_left.csv"));
    let (_, slab) = csv(&dir.path().join("fig4_slab.csv"));
    let (_, right) = csv(&dir.path().join("fig4_right.csv"));
    let gap = |a: &[f64], b: &[f64]| (1..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
    assert!(gap(left.last().unwrap(), &slab[0]) < 1e-8);
    assert!(gap(slab.last().unwrap(), &right[0]) < 1e-8);
    assert!((left[0][1] - 1.0 / 3.0).abs() < 1e-4 && left[0][3].abs() < 1e-4);
    let far = right.last().unwrap();
    assert!((far[2] - 2.0 / 3.0).abs() < 1e-4 && far[3].abs() < 1e-4);
    let doc = json(&dir.path().join("fig4.json"));
    assert_eq!(doc["result"]["full_domain"]["files"][1], "fig4_slab.csv");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        assert!(run(dir.path(), &["solve", "--mesh", "64", "--alpha-plus", "0.7", "--out", out]).status.success());
    }
    let read = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap();
    let strip = |s: String| s.replace("\"out\": \"a\"", "").replace("\"out\": \"b\"", "");
    assert_eq!(strip(read("a.json")), strip(read("b.json")));
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn invalid_alpha_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--alpha-plus", "1.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &["solve", "--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["solve", "--bc", "dirichlet"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["solve", "--full-domain"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["verify", "--suite", "bogus"]).status.code(), Some(1));
}

#[test]
fn non_convergence_exits_two_with_last_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--lambda", "0.3", "--alpha-plus", "0.8", "--max-iter", "1", "--continuation", "false", "--out", "nc"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&dir.path().join("nc.json"))["result"]["converged"], false);
}

#[test]
fn config_file_is_overridden_by_flags_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "lambda = 0.9\nmesh = 64\nalpha_plus = 0.6\n").unwrap();
    let out = run(dir.path(), &["solve", "--config", "run.toml", "--lambda", "0.5", "--out", "c"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = &json(&dir.path().join("c.json"))["config"];
    assert_eq!(cfg["params"]["lambda"], 0.5);
    assert_eq!(cfg["params"]["alpha_plus"], 0.6);
    assert_eq!(cfg["solver"]["mesh_size"], 64);
    fs::write(dir.path().join("bad.toml"), "lamda = 0.9\n").unwrap();
    assert_eq!(run(dir.path(), &["solve", "--config", "bad.toml"]).status.code(), Some(1));
}

#[test]
fn planck_ladder_reproduces_positivity_window() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sequence", "--c0", "0.3333333333", "--A", "0.3333333333", "--lambda2", "0.01", "--n-min", "-8", "--n-max", "8", "--out", "fig1"];
    assert!(run(dir.path(), &args).status.success());
    let (header, rows) = csv(&dir.path().join("fig1.csv"));
    assert_eq!(header, ["n", "A_plus", "A_minus", "j", "min_cplus", "min_cminus", "positive"]);
    assert_eq!(rows.len(), 17);
    let a = 0.3333333333;
    for r in &rows {
        let n = r[0];
        assert_eq!(r[6] == 1.0, n.abs() <= 7.0, "n = {n}");
        // Equal mobilities: j = (A- - A+)/2 = -2nA.
        assert!((r[3] - 0.5 * (r[2] - r[1])).abs() < 1e-15);
        assert!((r[3] + 2.0 * n * a).abs() < 1e-12);
        assert!((r[1] + r[2] - 2.0 * a).abs() < 1e-12);
    }
    assert_eq!(json(&dir.path().join("fig1.json"))["result"]["positive_radius"], 7);
}

#[test]
fn single_member_ladder_is_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sequence", "--n-min", "0", "--n-max", "0", "--profiles", "--profile-points", "11", "--out", "s"]);
    assert!(out.status.success());
    let (_, rows) = csv(&dir.path().join("s.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][..4], &[0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
    let (_, profile) = csv(&dir.path().join("s_n0.csv"));
    assert_eq!(profile.len(), 11);
    assert!(profile.iter().all(|p| (p[1] - (1.0 + p[0]) / 3.0).abs() < 1e-15 && p[3] == 0.0));
}

#[test]
fn sequence_from_solve_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["solve", "--alpha-plus", "0.8", "--out", "seed"]).status.success());
    let out = run(dir.path(), &["sequence", "--seed", "seed.json", "--n-min", "-1", "--n-max", "1", "--scan", "201", "--out", "lad"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let seed = json(&dir.path().join("seed.json"));
    let (_, rows) = csv(&dir.path().join("lad.csv"));
    let theta = seed["result"]["invariants"]["theta"].as_f64().unwrap();
    assert!((rows[1][1] - seed["result"]["a_plus"].as_f64().unwrap()).abs() < 1e-15);
    assert!((rows[2][1] - rows[1][1] - theta).abs() < 1e-12);
    let bad = run(dir.path(), &["sequence", "--seed", "seed.json", "--c0", "0.2"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["group", "airy", "reservoir", "residuals"] {
        let out = run(dir.path(), &["verify", "--suite", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("PASS") && !text.contains("FAIL"));
    }
    assert!(run(dir.path(), &["verify", "--out", "v.json"]).status.success());
    assert_eq!(json(&dir.path().join("v.json"))["result"]["failed"], 0);
}

#[test]
fn reservoir_profile_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["reservoir", "--side", "left", "--cinf", "0.5", "--amplitude", "-0.3", "--lambda", "0.4", "--out", "r"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("r.csv"));
    assert_eq!(header, ["x", "c_plus", "c_minus", "E", "phi"]);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert_eq!(rows.last().unwrap()[0], 0.0);
    assert!(rows.iter().all(|r| (r[1] * r[2] - 0.25).abs() < 1e-14));
    let ids = &json(&dir.path().join("r.json"))["result"]["identities"];
    assert!(ids["product"].as_f64().unwrap() < 1e-12 && ids["poisson_boltzmann"].as_f64().unwrap() < 1e-8);
    let both = run(dir.path(), &["reservoir", "--amplitude", "0.1", "--c-plus-face", "0.4"]);
    assert_eq!(both.status.code(), Some(1));
}
