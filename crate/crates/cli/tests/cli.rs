use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirapprox"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn eval_prints_one_half() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.json", r#"{"polynomial": [[0, 0], [1, 0]], "points": [[1, 0]]}"#);
    let out = run(&["eval", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.5");
}

#[test]
fn seminorm_shift_and_supnorm() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.json", r#"{"polynomial": [[1, 0], [0, 0], [0, 0], [2, 0]], "delta": 1.0}"#);
    let out_path = dir.path().join("n.json");
    let out = run(&["seminorm", "--input", s(&input), "--sigma", "0.5", "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    // 1 + 2·4^{-1/2} = 2
    assert!((read_json(&out_path)["seminorm"].as_f64().unwrap() - 2.0).abs() < 1e-14);

    let out = run(&["shift", "--input", s(&input), "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    assert!((read_json(&out_path)[3][0].as_f64().unwrap() - 0.5).abs() < 1e-15);

    let out = run(&["supnorm", "--input", s(&input), "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&out_path)["value"].as_f64().unwrap();
    assert!(v <= 3.0 + 1e-12 && v > 2.9, "{v}");
}

#[test]
fn abscissa_of_all_ones() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", r#"{"rule": {"kind": "all-ones"}, "truncation": 20000}"#);
    let out_path = dir.path().join("r.json");
    let out = run(&["abscissa", "--input", s(&input), "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("sigma_c_estimate"));
}

#[test]
fn bohr_check_on_random_polynomials() {
    let dir = TempDir::new().unwrap();
    for seed in [1, 2] {
        let out_path = dir.path().join(format!("b{seed}.json"));
        let seed = seed.to_string();
        let out = run(&["bohr-check", "--seed", &seed, "--degree", "20", "--output", s(&out_path)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let r = read_json(&out_path);
        assert!(r["halfplane"].as_f64().unwrap() > 0.0 && r["polydisc"].as_f64().unwrap() > 0.0);
        assert!(r["relative_gap"].as_f64().unwrap() <= 0.02);
    }
}

#[test]
fn bohr_lift_round_trips_through_its_own_output() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.json", r#"{"polynomial": [[1, 0], [0.5, -1], [0, 0], [0.25, 0], [0, 0], [-3, 2]]}"#);
    let lifted = dir.path().join("q.json");
    let back = dir.path().join("p2.json");
    assert_eq!(run(&["bohr-lift", "--input", s(&input), "--output", s(&lifted)]).status.code(), Some(0));
    assert_eq!(run(&["bohr-lift", "--input", s(&lifted), "--output", s(&back)]).status.code(), Some(0));
    let original: Value = serde_json::from_str(r#"[[1, 0], [0.5, -1], [0, 0], [0.25, 0], [0, 0], [-3, 2]]"#).unwrap();
    let back = read_json(&back);
    for (a, b) in original.as_array().unwrap().iter().zip(back.as_array().unwrap()) {
        assert_eq!(a[0].as_f64(), b[0].as_f64());
        assert_eq!(a[1].as_f64(), b[1].as_f64());
    }
}

const DISC_FIT: &str = r#"{
    "set": {"kind": "disc", "center": [-1, 0], "radius": 0.5},
    "target": {"kind": "exp"},
    "degree": 10
}"#;

#[test]
fn fit_is_deterministic_to_the_byte() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "f.json", DISC_FIT);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = run(&["fit", "--input", s(&input), "--output", s(out)]);
        assert!(matches!(o.status.code(), Some(0) | Some(3)), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let r = read_json(&a);
    assert!(r["minimax_error"].as_f64().unwrap() < 1e-2);
    assert!(r["provenance"]["samples"].as_u64().unwrap() > 0);
}

#[test]
fn convergence_study_emits_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "c.json",
        r#"{"set": {"kind": "disc", "center": [-1, 0], "radius": 0.5}, "target": {"kind": "exp"}, "degrees": [2, 5, 10]}"#,
    );
    let out = run(&["convergence-study", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,minimax_error");
    assert_eq!(lines.len(), 4);
    let errs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn constrained_fit_reports_non_convergence_with_exit_three() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "c.json",
        r#"{"set": {"kind": "rectangle", "corner_lo": [-1.5, -1], "corner_hi": [-0.5, 1]},
            "target": {"kind": "constant", "value": [1, 0]}, "f": [[0, 0], [1, 0]], "degree": 10}"#,
    );
    let out_path = dir.path().join("r.json");
    // a budget of 1e-6 cannot move 2^{-s} anywhere near 1
    let out = run(&["fit-constrained", "--input", s(&input), "--sigma", "1", "--eps", "1e-6", "--density", "0.05", "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(3));
    let r = read_json(&out_path);
    assert_eq!(r["converged"], Value::Bool(false));
    assert!(r["constraint_value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn laurent_and_rational_fit_on_an_annulus() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "l.json",
        r#"{"set": {"kind": "annulus", "center": [0, 0], "r_inner": 1, "r_outer": 2},
            "density": {"boundary_spacing": 0.05, "interior_spacing": 0.25},
            "target": {"kind": "sum", "terms": [{"kind": "identity"}, {"kind": "inverse", "center": [0, 0]}]},
            "anchors": [[0, 0]], "points": [[1.5, 0.2]], "degrees": [2, 3]}"#,
    );
    let out_path = dir.path().join("l_out.json");
    let out = run(&["laurent", "--input", s(&input), "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = &read_json(&out_path)["values"][0];
    // f0 = s, f1 = 1/s at 1.5 + 0.2i
    let z = (1.5f64, 0.2f64);
    let inv = (z.0 / (z.0 * z.0 + z.1 * z.1), -z.1 / (z.0 * z.0 + z.1 * z.1));
    assert!((v["f0"][0].as_f64().unwrap() - z.0).abs() < 1e-8);
    assert!((v["holes"][0][1].as_f64().unwrap() - inv.1).abs() < 1e-8);

    // P_1 has to approximate w ↦ w by Σ a_n n^{-w} on the image of the set
    let input = write(
        &dir,
        "r.json",
        r#"{"set": {"kind": "annulus", "center": [0, 0], "r_inner": 1, "r_outer": 2},
            "density": {"boundary_spacing": 0.05, "interior_spacing": 0.25},
            "target": {"kind": "sum", "terms": [{"kind": "constant", "value": [2, 0]}, {"kind": "inverse", "center": [0, 0]}]},
            "anchors": [[0, 0]], "degrees": [1, 20]}"#,
    );
    let out = run(&["rational-fit", "--input", s(&input), "--output", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&out_path);
    assert!(r["sup_error"].as_f64().unwrap() < 1e-5, "{r}");
    assert_eq!(r["function"]["parts"][0]["coeffs"][0][0].as_f64(), Some(0.0));
}

const FAMILY: &str = r#"{"entries": [
    {"target": {"kind": "constant", "value": [0, 0]}, "m": 1, "tol": 0.1},
    {"target": {"kind": "constant", "value": [1, 0]}, "m": 1, "tol": 0.1},
    {"target": {"kind": "identity"}, "m": 1, "tol": 0.1}
]}"#;

#[test]
fn universal_build_then_verify() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "u.json",
        &format!(r#"{{"family": {FAMILY}, "options": {{"budget_scale": 4096, "density": {{"boundary_spacing": 0.05, "interior_spacing": 0.25}}}}}}"#),
    );
    let sched = dir.path().join("s.json");
    let out = run(&["universal-build", "--input", s(&input), "--output", s(&sched)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cuts: Vec<u64> = read_json(&sched)["schedule"]["cuts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
    assert_eq!(cuts.len(), 3);
    assert!(cuts.windows(2).all(|w| w[0] < w[1]));

    let report = dir.path().join("v.json");
    let out = run(&["universal-verify", "--input", s(&sched), "--output", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&report);
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(r["note"].as_str().unwrap().contains("finitely many"));
}

#[test]
fn universal_build_with_default_budgets_keeps_the_partial_schedule() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "u.json",
        &format!(r#"{{"family": {FAMILY}, "options": {{"max_block": 16, "density": {{"boundary_spacing": 0.05, "interior_spacing": 0.25}}}}}}"#),
    );
    let sched = dir.path().join("s.json");
    let out = run(&["universal-build", "--input", s(&input), "--output", s(&sched)]);
    assert_eq!(out.status.code(), Some(3));
    let r = read_json(&sched);
    assert_eq!(r["schedule"]["cuts"].as_array().unwrap().len(), 1);
    assert_eq!(r["schedule"]["failure"]["stage"].as_u64(), Some(2));
    // the partial artifact is still accepted by the verifier, which reports failure
    let out = run(&["universal-verify", "--input", s(&sched)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn chordal_check_writes_json_and_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", r#"{"interval": [2, 3], "ladder": [10, 100, 1000], "eps": 0.01}"#);
    let (json, csv) = (dir.path().join("c_out.json"), dir.path().join("c_out.csv"));
    let out = run(&["chordal-check", "--input", s(&input), "--output", s(&json), "--csv", s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&json)["n0"].as_u64(), Some(100));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("N,chi_sup_error\n"));

    let out = run(&["chordal-check", "--input", s(&input), "--eps", "1e-9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes_for_bad_input_and_resource_limits() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["eval", "--input", "/nonexistent/x.json"]).status.code(), Some(2));
    let bad = write(&dir, "bad.json", "{not json");
    assert_eq!(run(&["eval", "--input", s(&bad)]).status.code(), Some(2));
    let empty = write(&dir, "e.json", r#"{"polynomial": [], "points": []}"#);
    assert_eq!(run(&["eval", "--input", s(&empty)]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));

    let limited = write(&dir, "l.json", r#"{"plan": {"polydisc": {"max_variables": 2}}}"#);
    let out = run(&["bohr-check", "--input", s(&limited), "--degree", "20"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin().args(["eval", "--input", s(&empty)]).env("DIRAPPROX_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
