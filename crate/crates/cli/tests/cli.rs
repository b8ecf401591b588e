use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> i32 {
    run_env(args, out, &[])
}

fn run_env(args: &[&str], out: &Path, env: &[(&str, &str)]) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_flatfocus"));
    cmd.args(args).arg("--out").arg(out).env_remove("HYPB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().unwrap();
    o.status.code().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn optimal_h(kf: &str) -> f64 {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["build", "--family", "optimal", "--kd", "-1", "--kf", kf], d.path()), 0);
    json(&d.path().join("certificate.json"))["result"]["params"]["h"].as_f64().unwrap()
}

#[test]
fn build_optimal_certifies() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["build", "--family", "optimal", "--kd", "-1", "--kf", "0.01"], d.path()), 0);
    let cert = json(&d.path().join("certificate.json"));
    assert_eq!(cert["result"]["certificate"]["c1_ok"], true);
    assert_eq!(cert["result"]["certificate"]["c2_ok"], true);
    let table = json(&d.path().join("table.json"));
    assert_eq!(table["table_hash"], cert["table_hash"]);
    assert_eq!(table["config_hash"], cert["config_hash"]);
    assert!(std::fs::read_to_string(d.path().join("table.svg")).unwrap().contains("<svg"));
    assert!(d.path().join("build.meta.json").exists());
}

#[test]
fn thin_strips_fail_with_a_witness() {
    let h = 0.5 * optimal_h("0.01");
    let d = TempDir::new().unwrap();
    let hs = h.to_string();
    let args = ["build", "--family", "main", "--kd", "-1", "--kf", "0.01", "--h", &hs, "--l", "100"];
    assert_eq!(run(&args, d.path()), 2);
    let cert = &json(&d.path().join("certificate.json"))["result"]["certificate"];
    assert_eq!(cert["c1_ok"], false);
    assert!(cert["c1_margin"].as_f64().unwrap() < 0.0);
    assert!(cert["c1_witness_points"].as_array().unwrap().len() == 2);

    // The same table also breaks cone invariance.
    let args = [
        "verify-cones", "--family", "main", "--kd", "-1", "--kf", "0.01", "--h", &hs, "--l", "100", "--orbits", "300",
        "--steps", "1000", "--seed", "3",
    ];
    assert_eq!(run(&args, d.path()), 3);
    let rep = json(&d.path().join("survey.json"));
    assert_eq!(rep["result"]["pass"], false);
    assert!(!rep["result"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn spiral_round_count() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["build", "--family", "spiral", "--kd", "-1", "--kf", "0.01", "--r0", "5"], d.path()), 0);
    let c = json(&d.path().join("certificate.json"));
    assert_eq!(c["result"]["spiral_params"]["rounds"], 4);
    assert_eq!(c["result"]["passes"], true);
}

#[test]
fn cone_survey_is_byte_identical_across_runs_and_threads() {
    let args = ["verify-cones", "--kf", "0.1", "--orbits", "64", "--steps", "200", "--seed", "9"];
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(run_env(&args, a.path(), &[("HYPB_THREADS", "1")]), 0);
    assert_eq!(run_env(&args, b.path(), &[("HYPB_THREADS", "1")]), 0);
    assert_eq!(run(&[&args[..], &["--threads", "3"]].concat(), c.path()), 0);
    let read = |d: &TempDir| std::fs::read_to_string(d.path().join("survey.json")).unwrap();
    assert!(read(&a) == read(&b));
    assert!(read(&a) == read(&c));
    let meta = |d: &TempDir| json(&d.path().join("verify-cones.meta.json"));
    assert_eq!(meta(&a)["threads"], 1);
    assert_eq!(meta(&c)["threads"], 3);
    let rep = json(&a.path().join("survey.json"));
    assert_eq!(rep["result"]["pass"], true);
    assert_eq!(rep["result"]["N"], 64);
}

#[test]
fn config_file_with_flags_winning() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, r#"{"family": "optimal", "k_f": 0.1, "seed": 5, "n_orbits": 8, "n_steps": 500}"#).unwrap();
    let out = d.path().join("o");
    let code = run(&["lyapunov", "--config", cfg.to_str().unwrap(), "--seed", "6"], &out);
    assert_eq!(code, 0);
    let r = json(&out.join("lyapunov.json"));
    assert_eq!(r["config"]["seed"], 6);
    assert_eq!(r["config"]["k_f"].as_f64(), Some(0.1));
    assert_eq!(r["result"]["N"], 8);
    let csv = std::fs::read_to_string(out.join("lyapunov.csv")).unwrap();
    assert!(csv.starts_with("# config_hash "));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 8);

    // Unknown keys are rejected rather than ignored.
    std::fs::write(&cfg, r#"{"kf": 0.1}"#).unwrap();
    assert_eq!(run(&["lyapunov", "--config", cfg.to_str().unwrap()], &out), 1);
}

#[test]
fn lyapunov_expectations() {
    let d = TempDir::new().unwrap();
    let args = ["lyapunov", "--family", "optimal", "--kf", "0.1", "--orbits", "16", "--steps", "2000"];
    assert_eq!(run(&[&args[..], &["--expect-positive"]].concat(), d.path()), 0);
    let r = json(&d.path().join("lyapunov.json"));
    assert!(r["result"]["mean"].as_f64().unwrap() > 0.0);
    // Flat square: only the log(n)/n bias of parabolic growth remains.
    let args = ["lyapunov", "--family", "square", "--orbits", "16", "--steps", "2000"];
    assert_eq!(run(&args, d.path()), 0);
    let m = json(&d.path().join("lyapunov.json"))["result"]["mean"].as_f64().unwrap();
    assert!(m.abs() < 0.01, "{m}");
}

#[test]
fn scaling_study_rows() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["scaling-study", "--kf-list", "0.1,0.03,0.01"], d.path()), 0);
    let csv = std::fs::read_to_string(d.path().join("study.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("k_f,h_o,h_o_over_k_f"));
    let ratio = |r: &str| r.split(',').nth(2).unwrap().parse::<f64>().unwrap();
    let rs: Vec<f64> = rows[1..].iter().map(|r| ratio(r)).collect();
    let (lo, hi) = rs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 3.0);
    let study = json(&d.path().join("study.json"));
    let rows = study["result"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["optimal_passes"] == true && r["spiral_passes"] == true));
    // N-bar and M grow as k_f shrinks.
    assert!(rows[2]["n_bar"].as_u64() > rows[0]["n_bar"].as_u64());
    assert!(rows[2]["rounds"].as_u64() > rows[0]["rounds"].as_u64());
    for svg in ["study_h_o.svg", "study_size.svg"] {
        assert!(std::fs::read_to_string(d.path().join(svg)).unwrap().starts_with("<svg"));
    }
    assert_eq!(run(&["scaling-study", "--kf-list", "0.01,0.1"], d.path()), 1);
}

#[test]
fn export_and_orbit_dump() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["export-svg", "--kf", "0.1"], d.path()), 0);
    assert!(d.path().join("table.svg").exists());
    let args = ["orbit-dump", "--kf", "0.1", "--steps", "50", "--seed", "4"];
    assert_eq!(run(&args, d.path()), 0);
    let first = std::fs::read_to_string(d.path().join("orbit.csv")).unwrap();
    let csv = first.clone();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "step,s,alpha,tau,piece_label,n_flat_hits");
    assert_eq!(rows.len(), 51);
    assert!(rows[1..].iter().all(|r| !r.contains(",flat,")));
    assert_eq!(run(&args, d.path()), 0);
    assert!(std::fs::read_to_string(d.path().join("orbit.csv")).unwrap() == first);
    assert!(std::fs::read_to_string(d.path().join("orbit.svg")).unwrap().contains("<path"));

    let args = ["orbit-dump", "--kf", "0.1", "--steps", "5", "--s0", "0.5", "--alpha0", "0.2"];
    assert_eq!(run(&args, d.path()), 0);
    let o = json(&d.path().join("orbit.json"));
    assert_eq!(o["result"]["x0"]["alpha"].as_f64(), Some(0.2));
    assert_eq!(run(&["orbit-dump", "--s0", "0.5"], d.path()), 1);
}

#[test]
fn usage_errors_do_not_look_like_certificate_failures() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["build", "--no-such-flag"], d.path()), 1);
    assert_eq!(run(&["build", "--family", "main"], d.path()), 1);
}
