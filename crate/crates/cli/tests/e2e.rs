use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ppde-lab");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        let text = fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}\n{}", self.stderr));
        serde_json::from_str(&text).unwrap()
    }

    fn csv(&self, name: &str) -> Vec<Vec<String>> {
        let mut r = csv::Reader::from_path(self.out.join(name)).unwrap();
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        let mut rows = vec![header];
        rows.extend(r.records().map(|x| x.unwrap().iter().map(String::from).collect()));
        rows
    }

    fn column(&self, name: &str, col: &str) -> Vec<f64> {
        let rows = self.csv(name);
        let k = rows[0].iter().position(|h| h == col).unwrap_or_else(|| panic!("no column {col}"));
        rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
    }
}

fn run_in(dir: &Path, out: &str, config: &Value, args: &[&str], env: &[(&str, &str)]) -> Run {
    let cfg = dir.join(format!("{out}.json"));
    fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let out = dir.join(out);
    let mut cmd = Command::new(BIN);
    cmd.args(&args[..1]).arg("--config").arg(&cfg).arg("--out").arg(&out).args(&args[1..]);
    cmd.env_remove("PPDE_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    finish(cmd.output().unwrap(), out)
}

fn finish(o: Output, out: PathBuf) -> Run {
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
        out,
    }
}

fn run(config: Value, args: &[&str]) -> (TempDir, Run) {
    let dir = TempDir::new().unwrap();
    let r = run_in(dir.path(), "out", &config, args, &[]);
    (dir, r)
}

fn assert_code(r: &Run, code: i32) {
    assert_eq!(r.code, code, "stdout:\n{}\nstderr:\n{}", r.stdout, r.stderr);
}

fn pucci(depth: usize, dt: f64, l: f64) -> Value {
    serde_json::json!({
        "tree": {"depth": depth, "dt": dt},
        "generator": {"name": "pucci", "L": l},
        "terminal": {"name": "sin", "k": 2.0},
    })
}

#[test]
fn solve_zero_generator_reproduces_the_path() {
    let cfg = serde_json::json!({
        "tree": {"depth": 3, "dt": 0.25},
        "generator": {"name": "zero"},
        "terminal": {"name": "brownian"},
    });
    let (_d, r) = run(cfg, &["solve"]);
    assert_code(&r, 0);
    assert_eq!(r.column("u.csv", "u"), r.column("u.csv", "omega"));
    assert_eq!(r.column("u.csv", "u").len(), 15);
    let rep = r.json("solve.json");
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["root"], 0.0);
    assert!(r.stdout.contains("passed") && r.stdout.contains("true"));
}

#[test]
fn solve_path_dependent_generator() {
    let cfg = serde_json::json!({
        "tree": {"depth": 7, "dt": 0.01},
        "generator": {"name": "running_max", "c0": 1.0, "zcap": 2.0},
        "terminal": {"name": "lookback", "strike": 0.1},
    });
    let (_d, r) = run(cfg, &["solve"]);
    assert_code(&r, 0);
    assert_eq!(r.json("solve.json")["super_check"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn snell_depth_one_fixture() {
    let cfg = serde_json::json!({
        "tree": {"depth": 1, "dt": 1.0},
        "L": 0.0,
        "obstacle": {"name": "table", "values": {"0:": 0.4, "1:1": 1.0, "1:0": 0.0}},
    });
    let (_d, r) = run(cfg, &["snell"]);
    assert_code(&r, 0);
    let rep = r.json("snell.json");
    assert_eq!(rep["value"], 0.5);
    assert_eq!(rep["brute_force"], 0.5);
    assert_eq!(r.column("snell.csv", "Y"), vec![0.5, 0.0, 1.0]);
    let tau = r.csv("tau.csv");
    assert_eq!(tau[1][..2], ["1:0".to_string(), "1:0".to_string()]);
    assert!(r.stdout.contains("Y_0") && r.stdout.contains("0.5"));
}

#[test]
fn snell_stops_early_when_the_obstacle_dominates() {
    let cfg = serde_json::json!({
        "tree": {"depth": 5, "dt": 0.04},
        "L": 1.0,
        "obstacle": {"name": "put", "strike": 0.3},
    });
    let (_d, r) = run(cfg, &["snell"]);
    assert_code(&r, 0);
    let rep = r.json("snell.json");
    assert_eq!(rep["value"], rep["brute_force"]);
    let stops = r.csv("tau.csv");
    assert!(stops[1..].iter().any(|row| row[2] != "5"), "some path stops before the horizon");
}

#[test]
fn decompose_reports_exact_identities() {
    let cfg = serde_json::json!({
        "tree": {"depth": 5, "dt": 0.04},
        "L": 1.0,
        "obstacle": {"name": "put", "strike": 0.0},
    });
    let (_d, r) = run(cfg, &["decompose"]);
    assert_code(&r, 0);
    let rep = r.json("decompose.json");
    assert!(rep["identity_error"].as_f64().unwrap() < 1e-12);
    assert!(rep["reflection_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(r.csv("kappa.csv").len(), 1 + 32 * 6);
    let a = r.column("decompose.csv", "A");
    assert!(a.iter().all(|&x| x >= -1e-12), "A is nondecreasing from 0");
}

#[test]
fn compare_flags_a_shifted_oracle() {
    let mut cfg = pucci(6, 0.02, 1.0);
    cfg["compare"] = serde_json::json!({"u": {"kind": "oracle", "offset": 1.0}});
    let (_d, r) = run(cfg, &["compare"]);
    assert_code(&r, 1);
    let rep = r.json("compare.json");
    assert_eq!(rep["passed"], false);
    assert_eq!(rep["terminal_ok"], false);
    assert_eq!(rep["violations"].as_array().unwrap().len(), 127);
}

#[test]
fn compare_oracle_against_itself_and_an_upper_shift() {
    let mut cfg = pucci(6, 0.02, 1.0);
    let (_d, r) = run(cfg.clone(), &["compare"]);
    assert_code(&r, 0);
    cfg["compare"] = serde_json::json!({"v": {"kind": "oracle", "time_shift": 0.5}});
    let (_d, r) = run(cfg, &["compare"]);
    assert_code(&r, 0);
    assert!(r.json("compare.json")["max_gap"].as_f64().unwrap() <= 0.0);
}

#[test]
fn perron_recovers_the_oracle() {
    let (_d, r) = run(pucci(6, 0.02, 1.0), &["perron"]);
    assert_code(&r, 0);
    let rep = r.json("perron.json");
    assert_eq!(rep["root_gap"], 0.0);
    assert_eq!(rep["members"].as_array().unwrap().len(), 4);
    assert_eq!(rep["check"]["passed"], true);
    let rows = r.csv("perron.csv");
    // at the leaves every shift coincides and ties go to the first member
    assert!(rows[1..].iter().filter(|row| row[1] != "6").all(|row| row[7] == "shift(delta=0)"));
}

#[test]
fn perron_gap_without_the_exact_member() {
    let mut cfg = pucci(6, 0.02, 1.0);
    cfg["family_spec"] = serde_json::json!({"shifts": [0.3, 0.1], "upper_slack": 0.1});
    let (_d, r) = run(cfg, &["perron"]);
    assert_code(&r, 0);
    let gap = r.json("perron.json")["root_gap"].as_f64().unwrap();
    assert!((gap - 0.1 * 0.12).abs() < 1e-12, "{gap}");
}

#[test]
fn maxprinciple_needs_a_nonpositive_terminal() {
    let cfg = serde_json::json!({
        "tree": {"depth": 5, "dt": 0.04},
        "L": 1.0,
        "terminal": {"name": "put", "strike": 0.0},
    });
    // a put payoff is positive somewhere, so only the constant case may pass
    let mut neg = cfg.clone();
    neg["terminal"] = serde_json::json!({"name": "constant", "c": -0.25});
    let (_d, r) = run(neg, &["maxprinciple"]);
    assert_code(&r, 0);
    let rep = r.json("maxprinciple.json");
    assert!(rep["max_u"].as_f64().unwrap() <= 0.0);
    let (_d, r) = run(cfg, &["maxprinciple"]);
    assert_code(&r, 1);
    assert_eq!(r.json("maxprinciple.json")["terminal_ok"], false);
}

#[test]
fn regularize_sup_and_inf() {
    let cfg = serde_json::json!({
        "tree": {"depth": 4, "dt": 0.0625},
        "obstacle": {"name": "sin", "k": 3.0},
    });
    let (_d, r) = run(cfg.clone(), &["regularize", "--n", "2", "--mode", "sup"]);
    assert_code(&r, 0);
    let (orig, reg) = (r.column("regularize.csv", "original"), r.column("regularize.csv", "regularized"));
    assert!(orig.iter().zip(&reg).all(|(a, b)| a <= b));
    assert!(r.json("regularize.json")["changed_nodes"].as_u64().unwrap() > 0);
    let (_d, r) = run(cfg.clone(), &["regularize", "--n", "2", "--mode", "inf"]);
    assert_code(&r, 0);
    let (orig, reg) = (r.column("regularize.csv", "original"), r.column("regularize.csv", "regularized"));
    assert!(orig.iter().zip(&reg).all(|(a, b)| a >= b));
    let (_d, r) = run(cfg, &["regularize", "--n", "1000"]);
    assert_code(&r, 0);
    assert_eq!(r.json("regularize.json")["changed_nodes"], 0);
}

#[test]
fn check_roles_and_generator_override() {
    let cfg = serde_json::json!({
        "tree": {"depth": 5, "dt": 0.04},
        "terminal": {"name": "square"},
    });
    let (_d, r) = run(cfg.clone(), &["check", "--role", "super"]);
    assert_code(&r, 0);
    assert_eq!(r.json("check.json")["role"], "super");
    let (_d, r) = run(cfg.clone(), &["check", "--role", "sub", "--generator", r#"{"name":"constant","c":5}"#]);
    assert_code(&r, 0);
    let (_d, r) = run(cfg, &["check", "--role", "super", "--generator", r#"{"name":"constant","c":5}"#, "--tol", "0.01"]);
    assert_code(&r, 1);
    let rep = r.json("check.json");
    assert!(!rep["violations"].as_array().unwrap().is_empty());
    assert!(r.stdout.contains("violations"));
}

#[test]
fn check_by_registry_name_uses_config_parameters() {
    let (_d, r) = run(pucci(5, 0.04, 2.0), &["check", "--generator", "pucci"]);
    assert_code(&r, 0);
    assert_eq!(r.json("check.json")["generator"], "pucci(L=2)");
    let (_d, r) = run(pucci(5, 0.04, 2.0), &["check", "--generator", "linear"]);
    assert_code(&r, 2);
    assert!(r.stderr.contains("linear"), "{}", r.stderr);
}

#[test]
fn expect_sup_and_inf() {
    let cfg = serde_json::json!({
        "tree": {"depth": 4, "dt": 0.0625},
        "L": 1.0,
        "terminal": {"name": "brownian"},
    });
    let (_d, r) = run(cfg.clone(), &["expect"]);
    assert_code(&r, 0);
    let rep = r.json("expect.json");
    // drift +L throughout: E[B_T] = L T
    assert_eq!(rep["root"], 0.25);
    assert!(rep["control"].as_object().unwrap().values().all(|v| v == 1.0));
    let (_d, r) = run(cfg, &["expect", "--mode", "inf"]);
    assert_code(&r, 0);
    assert_eq!(r.json("expect.json")["root"], -0.25);
    assert!(r.stdout.contains("-0.25"));
}

#[test]
fn registry_lists_everything() {
    let o = Command::new(BIN).arg("registry").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("pucci ") && text.contains("L: real >= 0"));
    for line in text.lines().filter(|l| l.contains("Lipschitz")) {
        assert!(line.contains("modulus rho"), "{line}");
    }
    assert!(text.contains("table") && text.contains("brownian"));
    let o = Command::new(BIN).args(["registry", "--json"]).output().unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 6);
    assert!(!v["functionals"].as_array().unwrap().is_empty());
}

#[test]
fn run_dispatches_on_the_operation_field() {
    let mut cfg = pucci(4, 0.04, 1.0);
    cfg["operation"] = "solve".into();
    let (_d, r) = run(cfg.clone(), &["run"]);
    assert_code(&r, 0);
    assert!(r.out.join("u.csv").exists());
    let (_d, r) = run(cfg, &["perron"]);
    assert_code(&r, 2);
    assert!(r.stderr.contains("operation"), "{}", r.stderr);
}

#[test]
fn invalid_configs_name_the_field() {
    let (_d, r) = run(pucci(3, 1.0, 2.0), &["solve"]);
    assert_code(&r, 2);
    assert!(r.stderr.contains("tree.dt"), "{}", r.stderr);
    let mut cfg = pucci(3, 0.25, 1.0);
    cfg["generator"] = serde_json::json!({"name": "pucci", "L": -1.0});
    let (_d, r) = run(cfg, &["solve"]);
    assert_code(&r, 2);
    assert!(r.stderr.contains("generator"), "{}", r.stderr);
    let mut cfg = pucci(3, 0.25, 1.0);
    cfg["terminal"] = serde_json::json!({"name": "call"});
    let (_d, r) = run(cfg, &["solve"]);
    assert_code(&r, 2);
    assert!(r.stderr.contains("terminal") && r.stderr.contains("strike"), "{}", r.stderr);
    let (_d, r) = run(serde_json::json!({"tree": {"depth": 3, "dt": 0.25}}), &["snell"]);
    assert_code(&r, 2);
    assert!(r.stderr.contains("obstacle"), "{}", r.stderr);
}

#[test]
fn artifacts_are_deterministic_across_threads_and_reruns() {
    let dir = TempDir::new().unwrap();
    let mut cfg = pucci(7, 0.01, 1.5);
    cfg["terminal"] = serde_json::json!({"name": "uniform", "lo": -1.0, "hi": 1.0});
    cfg["seed"] = 11.into();
    let a = run_in(dir.path(), "a", &cfg, &["perron"], &[("PPDE_LAB_THREADS", "1")]);
    let b = run_in(dir.path(), "b", &cfg, &["perron"], &[("PPDE_LAB_THREADS", "4")]);
    let c = run_in(dir.path(), "c", &cfg, &["perron", "--threads", "3"], &[]);
    for r in [&a, &b, &c] {
        assert_code(r, 0);
    }
    for f in ["perron.csv", "perron.json"] {
        let x = fs::read(a.out.join(f)).unwrap();
        assert_eq!(x, fs::read(b.out.join(f)).unwrap(), "{f}");
        assert_eq!(x, fs::read(c.out.join(f)).unwrap(), "{f}");
    }
    let d = run_in(dir.path(), "d", &cfg, &["solve", "--seed", "12"], &[]);
    let e = run_in(dir.path(), "e", &cfg, &["solve"], &[]);
    assert_ne!(fs::read(d.out.join("u.csv")).unwrap(), fs::read(e.out.join("u.csv")).unwrap());
}

#[test]
fn values_are_written_with_twelve_significant_digits() {
    let cfg = serde_json::json!({
        "tree": {"depth": 2, "dt": 0.09},
        "generator": {"name": "constant", "c": 1.0},
        "terminal": {"name": "constant", "c": 0.1},
    });
    let (_d, r) = run(cfg, &["solve"]);
    assert_code(&r, 0);
    let rows = r.csv("u.csv");
    // 0.1 + 2 * 0.09 accumulates roundoff that must not leak out
    assert_eq!(rows[1][4], "0.28");
    assert_eq!(r.json("solve.json")["root"], 0.28);
}
