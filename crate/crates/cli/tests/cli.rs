//! End-to-end checks of the command-line interface: exit-code triage,
//! artifact layout, and determinism of seeded reports.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sigmaflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigmaflow"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const BLOWUP_UNSTABLE: &str = r#"{
  "chi":   {"vertices": [[0.1, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.1]]},
  "alpha": {"vertices": [[0.5, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.5]]},
  "labels": [{"name": "E", "normal": [-1.0, -1.0]}]
}"#;

#[test]
fn toric_stability_unstable_blowup() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "stab.json", BLOWUP_UNSTABLE);
    let out = sigmaflow(&["toric-stability", "--config", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("unstable"), "{stdout}");
    assert!(stdout.contains("witness face E"), "{stdout}");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/stability-report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "unstable");
    assert_eq!(report["witness"], "E");
    let csv = fs::read_to_string(tmp.path().join("o/face-margins.csv")).unwrap();
    assert!(csv.starts_with("face,dim,margin"));
    assert!(csv.contains("E,1,"));

    // the same verdict under --expect-stable is a mathematical failure
    let out = sigmaflow(
        &["toric-stability", "--config", &cfg, "--out", "o2", "--expect-stable"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn toric_stability_solvable_case_passes_expect_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "stab.json",
        r#"{
          "chi":   {"vertices": [[0.1, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.1]]},
          "alpha": {"vertices": [[0.1, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.1]]}
        }"#,
    );
    let out = sigmaflow(
        &["toric-stability", "--config", &cfg, "--out", "o", "--expect-stable"],
        tmp.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("solvable-J"));
}

#[test]
fn malformed_config_exits_two_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{"chi": {"vertices": [[0,0],[1,0],[0,1]]},
            "alpha": {"vertices": [[0,0],[1,0],[0,1]]},
            "mystery_knob": 3}"#,
    );
    let out = sigmaflow(&["toric-stability", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mystery_knob"), "{stderr}");

    // unparseable JSON also exits 2
    let cfg = write(tmp.path(), "broken.json", "{not json");
    let out = sigmaflow(&["toric-stability", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_run_writes_trace_and_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "flow.json",
        r#"{
          "n": 1, "grid": 64,
          "alpha": {"a11": 1.0},
          "g0": {"a11": 4.0},
          "operator": {"c": [1.0]},
          "phi0_modes": [{"amplitude": 0.05, "freq": [1]}],
          "tol": 1e-5, "t_max": 50.0,
          "trace_stride": 10
        }"#,
    );
    let out = sigmaflow(&["flow", "--config", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["outcome"], "converged");
    assert!(summary["residual"].as_f64().unwrap() < 1e-5);
    assert_eq!(summary["sup_f_violations"], 0);

    let trace = fs::read_to_string(tmp.path().join("o/trace.csv")).unwrap();
    let tail = trace.lines().last().unwrap();
    let residual: f64 = tail.split(',').nth(1).unwrap().parse().unwrap();
    assert!(residual < 1e-5, "trace tail residual {residual}");

    let phi = fs::read_to_string(tmp.path().join("o/phi.csv")).unwrap();
    assert!(phi.starts_with("# n=1 N=64"));
}

#[test]
fn solve_model_and_newton_log() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "model.json",
        r#"{
          "domain": {"rect": {"min": [-1.0], "max": [1.0]}},
          "resolution": 129, "target": "model", "b_or_d": 1.0,
          "boundary": {"kind": "zero"}
        }"#,
    );
    let out = sigmaflow(&["solve-model", "--config", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let newton = fs::read_to_string(tmp.path().join("o/newton.csv")).unwrap();
    assert!(newton.starts_with("iter,residual,damping,min_eig"));
    let solution = fs::read_to_string(tmp.path().join("o/solution.csv")).unwrap();
    assert!(solution.contains("interior"));
}

#[test]
fn continuity_quadratic_path_completes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "cont.json",
        r#"{
          "problem": {
            "domain": {"rect": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}},
            "resolution": 17, "target": "toric", "b_or_d": 0.0, "c": 2.0,
            "background": {"kind": "quadratic", "quad": [[1.0, 0.0], [0.0, 1.0]]},
            "boundary": {"kind": "background-trace"}
          },
          "d_start": 5.0, "stages": 5,
          "c_schedule": {"mode": "compatible", "slope": 1.0}
        }"#,
    );
    let out = sigmaflow(&["continuity", "--config", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stages = fs::read_to_string(tmp.path().join("o/stages.csv")).unwrap();
    assert_eq!(stages.lines().count(), 6); // header + 5 stages
}

#[test]
fn check_operator_seeded_reports_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "op.json",
        r#"{
          "operator": {"c": [1.0, 0.5, 0.25]},
          "samples": 200,
          "spectrum_box": {"lo": 0.2, "hi": 5.0}
        }"#,
    );
    let a = sigmaflow(
        &["check-operator", "--config", &cfg, "--out", "a", "--seed", "7"],
        tmp.path(),
    );
    assert!(a.status.success());
    let b = sigmaflow(
        &["check-operator", "--config", &cfg, "--out", "b", "--seed", "7"],
        tmp.path(),
    );
    assert!(b.status.success());
    let ra = fs::read(tmp.path().join("a/structural-report.json")).unwrap();
    let rb = fs::read(tmp.path().join("b/structural-report.json")).unwrap();
    assert_eq!(ra, rb, "seeded reports must be byte-identical");

    // an over-deflated operator fails the check with exit 1
    let bad = write(
        tmp.path(),
        "bad-op.json",
        r#"{
          "operator": {"c": [1.0, 0.0], "epsilon": 0.5,
                       "region": {"kind": "eigenvalue-floor", "delta": 0.05}},
          "samples": 200,
          "spectrum_box": {"lo": 0.06, "hi": 0.2}
        }"#,
    );
    let out = sigmaflow(&["check-operator", "--config", &bad, "--out", "c"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn legendre_transform_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "leg.json",
        r#"{
          "domain": {"rect": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}},
          "resolution": 33,
          "potential": {"kind": "quadratic", "quad": [[1.0, 0.0], [0.0, 1.0]]},
          "out_resolution": 21
        }"#,
    );
    let out = sigmaflow(&["legendre", "--config", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/summary.json")).unwrap())
            .unwrap();
    // self-dual quadratic: the transform stays convex
    assert!(summary["min_hessian_eig"].as_f64().unwrap() > 0.5);
}

#[test]
fn env_thread_cap_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "op.json",
        r#"{"operator": {"c": [1.0, 0.0]}, "samples": 50,
            "spectrum_box": {"lo": 0.5, "hi": 2.0}}"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_sigmaflow"))
        .args(["check-operator", "--config", &cfg, "--out", "o"])
        .env("SIGMAFLOW_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
}
