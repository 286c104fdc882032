//! End-to-end runs of the binary. Outputs are compared byte for byte with
//! `tests/golden/`; set `BRANCHKIT_UPDATE_GOLDEN=1` to rewrite them.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run_env(&self, args: &[&str], threads: Option<&str>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_branchkit"));
        cmd.args(args).current_dir(self.dir.path()).env_remove("BRANCHKIT_THREADS");
        if let Some(t) = threads {
            cmd.env("BRANCHKIT_THREADS", t);
        }
        cmd.output().unwrap()
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, None)
    }

    fn ok(&self, args: &[&str]) -> Vec<u8> {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    }

    fn read(&self, rel: &str) -> Vec<u8> {
        std::fs::read(self.path(rel)).unwrap()
    }
}

fn golden(name: &str, actual: &[u8]) {
    let path = golden_dir().join(name);
    if std::env::var_os("BRANCHKIT_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from golden output:\n{}",
        String::from_utf8_lossy(actual)
    );
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn generate_complete_graph() {
    let s = Sandbox::new();
    let stdout = s.ok(&["generate", "--family", "er", "--n", "4", "--p", "1", "--out", "k4.tsv"]);
    golden("generate_k4.stdout", &stdout);
    golden("generate_k4.tsv", &s.read("k4.tsv"));
    golden("generate_k4.tsv.json", &s.read("k4.tsv.json"));
    assert_eq!(json(&stdout)["result"]["edges"], 6);
    assert_eq!(json(&stdout)["meta"]["seed"], 0);
}

#[test]
fn generate_pareto_mean_degree() {
    let s = Sandbox::new();
    let args = ["--seed", "5", "generate", "--family", "pareto", "--zeta", "3", "--mean-degree", "20", "--n", "2000", "--out", "p.tsv"];
    let stdout = s.ok(&args);
    golden("generate_pareto.stdout", &stdout);
    let v = json(&stdout);
    let d = v["result"]["mean_degree"].as_f64().unwrap();
    assert!((d - 20.0).abs() < 2.0, "{d}");
    assert_eq!(v["meta"]["seed"], 5);
    assert_eq!(v["meta"]["config"]["graph"]["zeta"], 3.0);
    // identical rerun, identical artifact
    let again = Sandbox::new();
    assert_eq!(again.ok(&args), stdout);
    assert_eq!(again.read("p.tsv"), s.read("p.tsv"));
}

#[test]
fn usage_errors_exit_2() {
    let s = Sandbox::new();
    assert_eq!(code(&s.run(&["generate", "--family", "er", "--p", "0.1", "--out", "x.tsv"])), 2);
    assert_eq!(code(&s.run(&["generate", "--family", "ba", "--n", "10", "--out", "x.tsv"])), 2);
    s.ok(&["generate", "--family", "er", "--n", "20", "--p", "0.3", "--out", "g.tsv"]);
    assert_eq!(code(&s.run(&["estimate", "--replicates", "g.tsv", "g.tsv"])), 2);
    assert_eq!(code(&s.run(&["estimate", "--replicates", "g.tsv", "g.tsv", "g.tsv", "--level", "2"])), 2);
    assert_eq!(code(&s.run(&["--threads", "0", "thresholds", "--kappa", "2"])), 2);
}

#[test]
fn data_errors_exit_3() {
    let s = Sandbox::new();
    std::fs::write(s.path("bad.tsv"), "a\tb\tnot-a-number\n").unwrap();
    let out = s.run(&["kappa", "bad.tsv"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.tsv:1"));
    assert_eq!(code(&s.run(&["kappa", "missing.tsv"])), 3);
    for (name, body) in [("r1", "a b\n"), ("r2", "c d\n"), ("r3", "e f\n")] {
        std::fs::write(s.path(name), body).unwrap();
    }
    assert_eq!(code(&s.run(&["estimate", "--replicates", "r1", "r2", "r3", "--nb", "10"])), 3);
}

#[test]
fn nonconvergence_exits_4() {
    let s = Sandbox::new();
    s.ok(&["--seed", "2", "generate", "--family", "er", "--n", "200", "--p", "0.05", "--out", "g.tsv"]);
    s.ok(&["--seed", "3", "perturb", "--input", "g.tsv", "--alpha", "0.01", "--beta", "0.2", "--out-dir", "r"]);
    let args = [
        "estimate", "--replicates", "r/replicate_1.tsv", "r/replicate_2.tsv", "r/replicate_3.tsv", "--max-iter", "1", "--nb", "10",
    ];
    let out = s.run(&args);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}

#[test]
fn estimate_noiseless_triple() {
    let s = Sandbox::new();
    let g = json(&s.ok(&["--seed", "4", "generate", "--family", "ba", "--n", "300", "--m", "3", "--out", "g.tsv"]));
    let v = json(&s.ok(&["estimate", "--replicates", "g.tsv", "g.tsv", "g.tsv", "--nb", "20", "--json"]));
    let e = &v["result"]["estimate"];
    assert_eq!(e["alpha_hat"], 0.0);
    assert_eq!(e["beta_hat"], 0.0);
    let (k, kh) = (g["result"]["kappa"].as_f64().unwrap(), e["kappa_hat"].as_f64().unwrap());
    assert!((k - kh).abs() <= 1e-9 * k, "{k} vs {kh}");
}

#[test]
fn perturb_and_estimate_golden() {
    let s = Sandbox::new();
    s.ok(&["--seed", "11", "generate", "--family", "pareto", "--n", "800", "--zeta", "2.5", "--mean-degree", "10", "--out", "g.tsv"]);
    let p = s.ok(&["--seed", "12", "perturb", "--input", "g.tsv", "--beta", "0.1", "--out-dir", "reps"]);
    golden("perturb.stdout", &p);
    let reps = ["reps/replicate_1.tsv", "reps/replicate_2.tsv", "reps/replicate_3.tsv"];
    let mut args = vec!["--seed", "13", "estimate", "--replicates"];
    args.extend(reps);
    args.extend(["--nb", "200", "--json"]);
    let stdout = s.ok(&args);
    golden("estimate.stdout", &stdout);
    let v = json(&stdout);
    let e = &v["result"]["estimate"];
    for key in ["alpha_ci", "beta_ci", "ci"] {
        assert_eq!(e[key].as_array().unwrap().len(), 2, "{key}");
    }
    assert_eq!(v["meta"]["config"]["nb"], 200);
    assert_eq!(v["meta"]["config"]["eps"], 1e-8);
    // text mode, and thread-count independence
    let mut text = args.clone();
    text.pop();
    let one = s.run_env(&text, Some("1"));
    let three = s.run_env(&text, Some("3"));
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    golden("estimate_text.stdout", &one.stdout);
    // the estimate feeds the thresholds command
    std::fs::write(s.path("est.json"), &stdout).unwrap();
    let t = json(&s.ok(&["thresholds", "--estimate-json", "est.json", "--theta", "0.016", "--gamma", "0.125"]));
    assert_eq!(t["result"]["kappa"], e["kappa_hat"]);
}

#[test]
fn thresholds_examples() {
    let s = Sandbox::new();
    let v = json(&s.ok(&["thresholds", "--kappa", "3", "--lambda", "1"]));
    assert_eq!(v["result"]["thresholds"]["percolation"]["value"], 0.5);
    let imm = v["result"]["thresholds"]["immunization"]["value"].as_f64().unwrap();
    assert!((imm - 2.0 / 3.0).abs() < 1e-15);
    let stdout = s.ok(&["thresholds", "--kappa", "10", "--variance", "0.25", "--theta", "0.016", "--gamma", "0.125"]);
    golden("thresholds_r0.stdout", &stdout);
    let r0 = json(&stdout)["result"]["r0"]["r0"].as_f64().unwrap();
    assert!((r0 - 1.021).abs() < 1e-3);
    let v = json(&s.ok(&["thresholds", "--kappa", "1", "--theta", "0.016", "--gamma", "0.125"]));
    assert_eq!(v["result"]["r0"]["r0"], 0.0);
    assert_eq!(v["result"]["regime"], "subcritical");
    assert!(v["result"]["thresholds"]["percolation"].is_null());
}

#[test]
fn moments_golden() {
    let s = Sandbox::new();
    s.ok(&["--seed", "21", "generate", "--family", "er", "--n", "150", "--p", "0.08", "--out", "g.tsv"]);
    let stdout = s.ok(&["moments", "--input", "g.tsv", "--beta", "0.2"]);
    golden("moments.stdout", &stdout);
    let v = json(&stdout);
    assert_eq!(v["result"]["closed_form"]["edge_unbiased"], true);
    let (cf, ex) = (&v["result"]["closed_form"], &v["result"]["exact"]);
    for k in ["var_y", "cov_xy", "var_x"] {
        let (a, b) = (cf[k].as_f64().unwrap(), ex[k].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-9 * b.abs(), "{k}: {a} vs {b}");
    }
    let v = json(&s.ok(&["moments", "--input", "g.tsv", "--alpha", "0.3", "--beta", "0.2"]));
    assert!(v["result"]["closed_form"]["var_x"].is_null());
    assert!(v["result"]["bias_leading_term"].is_null());
}

#[test]
fn kappa_of_labeled_list() {
    let s = Sandbox::new();
    std::fs::write(s.path("c.tsv"), "# hospital day\nA\tB\t400\nB\tC\t100\nC\tA\t301\nA\tA\t999\n").unwrap();
    let v = json(&s.ok(&["kappa", "c.tsv", "--weight-threshold", "300"]));
    let r = &v["result"][0];
    assert_eq!(r["n"], 3);
    assert_eq!(r["edges"], 2);
    // degrees (2, 1, 1): Σd² / Σd = 6/4
    assert_eq!(r["kappa"], 1.5);
}

#[test]
fn simulate_bias_golden() {
    let s = Sandbox::new();
    let args = [
        "--seed", "31", "simulate-bias", "--family", "er", "--n", "300", "--mean-degree", "10", "--beta-grid", "0.1,0.3",
        "--n-noisy", "100", "--bootstrap-reps", "100",
    ];
    let one = s.run_env(&args, Some("1"));
    let four = s.run_env(&args, Some("4"));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    golden("simulate_bias.csv", &one.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {\"command\":\"simulate-bias\""));
    assert!(lines.next().unwrap().starts_with("family,n,mean_degree,alpha,beta,kappa_true,bias,"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn simulate_coverage_golden() {
    let s = Sandbox::new();
    s.ok(&["--seed", "41", "generate", "--family", "pareto", "--n", "300", "--zeta", "2.5", "--mean-degree", "8", "--out", "t.tsv"]);
    let args = [
        "--seed", "42", "simulate-coverage", "--input", "t.tsv", "--alpha-grid", "0,0.01", "--beta-grid", "0,0.2",
        "--n-trials", "6", "--nb", "30", "--format", "jsonl", "--out", "cov.jsonl",
    ];
    assert!(s.run_env(&args, Some("1")).status.success());
    let one = s.read("cov.jsonl");
    assert!(s.run_env(&args, Some("3")).status.success());
    assert_eq!(one, s.read("cov.jsonl"));
    golden("simulate_coverage.jsonl", &one);
    let text = String::from_utf8(one).unwrap();
    let rows: Vec<Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["degenerate"], true);
    assert!(rows[0]["rf"].is_null());
    for r in &rows {
        assert_eq!(r["master_seed"], 42);
        assert_eq!(r["family"], "t");
    }
}
