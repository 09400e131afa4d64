use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use lqhv::construct::chsh_value;
use lqhv::io::{parse_family, parse_measure, AnyFamily, AnyMeasure};
use lqhv::scalar::rat;

fn lqhv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqhv"))
        .args(args)
        .env_remove("LQHV_TOL")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn generate(&self, kind: &str, name: &str, extra: &[&str]) -> String {
        let out = self.s(name);
        let mut args = vec!["generate", kind, "-o", &out];
        args.extend_from_slice(extra);
        let o = lqhv(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    }

    fn write(&self, name: &str, v: &Value) -> String {
        std::fs::write(self.path(name), v.to_string()).unwrap();
        self.s(name)
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

#[test]
fn check_exit_codes() {
    let d = Dir::new();
    let pr = d.generate("pr", "pr.json", &[]);
    let o = lqhv(&["check", &pr]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("pass"));

    let sig = d.generate("signaling", "sig.json", &[]);
    let o = lqhv(&["--json", "check", &sig]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sites {2}"));
    let report = stdout_json(&o);
    assert_eq!(report["consistency"]["passed"], json!(false));
    assert_eq!(report["consistency"]["witness"]["site_subset"], json!([2]));
    assert_eq!(report["consistency"]["witness"]["max_discrepancy"], json!(1.0));
    assert!(report.get("construction").is_none());

    std::fs::write(d.path("bad.json"), "{\"parties\": [{\"settings\": 2").unwrap();
    assert_eq!(code(&lqhv(&["check", &d.s("bad.json")])), 1);
    assert_eq!(code(&lqhv(&["check", &d.s("missing.json")])), 1);
}

#[test]
fn build_pr_box_rational() {
    let d = Dir::new();
    let pr = d.generate("pr", "pr.json", &[]);
    let out = d.s("m.json");
    let o = lqhv(&["--json", "build", &pr, "-o", &out, "--mode", "rational"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout_json(&o);
    assert_eq!(report["construction"]["min_atom"], json!("-1/16"));
    assert_eq!(report["construction"]["total_variation"], json!("2"));
    assert_eq!(report["construction"]["normalization"], json!("1"));
    assert_eq!(report["verification"]["max_error"], json!(0.0));
    assert!(report["input_digest"].as_str().unwrap().starts_with("sha256:"));

    let m = parse_measure(&std::fs::read_to_string(&out).unwrap(), 0.0).unwrap();
    let AnyMeasure::Rational(m) = m else {
        panic!("expected rational measure")
    };
    assert_eq!(m.min_atom(), rat(-1, 16));
}

#[test]
fn build_human_output_lists_the_statistics() {
    let d = Dir::new();
    let pr = d.generate("pr", "pr.json", &[]);
    let o = lqhv(&["build", &pr, "-o", &d.s("m.json")]);
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in [
        "normalization: 1",
        "min atom: -1/16",
        "total variation: 2",
        "verify max error: 0",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in {text}");
    }
}

#[test]
fn build_uniform_and_product() {
    let d = Dir::new();
    let uni = d.generate("uniform", "u.json", &[]);
    let out = d.s("um.json");
    assert_eq!(code(&lqhv(&["build", &uni, "-o", &out])), 0);
    let atoms = read_json(Path::new(&out))["atoms"].clone();
    let atoms = atoms.as_array().unwrap();
    assert_eq!(atoms.len(), 16);
    assert!(atoms.iter().all(|a| a == &json!("1/16")));

    let product = json!({
        "parties": [{"settings": 2, "outcomes": 2}, {"settings": 2, "outcomes": 2}],
        "mode": "float",
        "tables": {
            "1,1": [0.06, 0.14, 0.24, 0.56],
            "1,2": [0.15, 0.05, 0.6, 0.2],
            "2,1": [0.15, 0.35, 0.15, 0.35],
            "2,2": [0.375, 0.125, 0.375, 0.125]
        }
    });
    let p = d.write("product.json", &product);
    let o = lqhv(&["--json", "build", &p, "-o", &d.s("pm.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout_json(&o);
    let min: f64 = report["construction"]["min_atom"].as_str().unwrap().parse().unwrap();
    assert!(min >= 0.0);
    assert!(report["verification"]["max_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn build_refusals_write_nothing() {
    let d = Dir::new();
    let sig = d.generate("signaling", "sig.json", &[]);
    let out = d.path("never.json");
    assert_eq!(code(&lqhv(&["build", &sig, "-o", out.to_str().unwrap()])), 2);
    assert!(!out.exists());

    let pr = d.generate("pr", "pr.json", &[]);
    let o = lqhv(&["--budget", "15", "build", &pr, "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn quantum_singlet_reaches_tsirelson() {
    let d = Dir::new();
    let q = d.generate("chsh-singlet", "q.json", &[]);
    let fam = d.s("qf.json");
    let o = lqhv(&["quantum", &q, "-o", &fam]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let AnyFamily::Float(f) = parse_family(&std::fs::read_to_string(&fam).unwrap(), 1e-9, None).unwrap() else {
        panic!("expected float family")
    };
    let chsh = chsh_value(&f).unwrap();
    assert!((chsh - 2.0 * 2f64.sqrt()).abs() <= 1e-9, "{chsh}");
    assert_eq!(code(&lqhv(&["--tol", "1e-12", "check", &fam])), 0);
}

#[test]
fn lhv_verdicts() {
    let d = Dir::new();
    let pr = d.generate("pr", "pr.json", &[]);
    let o = lqhv(&["lhv", &pr]);
    assert_eq!(code(&o), 0);
    let verdict = stdout_json(&o);
    assert_eq!(verdict["feasible"], json!(false));
    assert!(verdict["certificate"]["coefficients"]["2,2"].is_array());
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));

    let iso = d.generate("isotropic", "iso.json", &["--p", "0.45"]);
    let out = d.path("v.json");
    let o = lqhv(&["--json", "lhv", &iso, "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report = stdout_json(&o);
    assert_eq!(report["lhv"]["feasible"], json!(true));
    assert_eq!(report["lhv"]["witness_verified"], json!(true));
    assert_eq!(read_json(&out)["feasible"], json!(true));

    let iso = d.generate("isotropic", "iso55.json", &["--p", "11/20"]);
    let report = stdout_json(&lqhv(&["--json", "lhv", &iso, "-o", &d.s("v2.json")]));
    assert_eq!(report["lhv"]["feasible"], json!(false));
    assert_eq!(report["lhv"]["certificate_valid"], json!(true));
}

#[test]
fn expectations() {
    let d = Dir::new();
    let pr = d.generate("pr", "pr.json", &[]);
    let o = lqhv(&["--json", "expect", &pr, "--tuple", "1,2", "--observables", "1,1;1,1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["expectation"], json!("1"));

    let m = d.s("m.json");
    assert_eq!(code(&lqhv(&["build", &pr, "-o", &m])), 0);
    let o = lqhv(&[
        "--json",
        "expect",
        &pr,
        "--tuple",
        "2,2",
        "--observables",
        "1,-1;1,-1",
        "--measure",
        &m,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["expectation"], json!("-1"));

    assert_eq!(
        code(&lqhv(&["expect", &pr, "--tuple", "3,1", "--observables", "1,1;1,1"])),
        1
    );
    assert_eq!(
        code(&lqhv(&["expect", &pr, "--tuple", "1,1", "--observables", "1,1,1;1,1"])),
        1
    );
}

#[test]
fn export_import_reverify_is_stable() {
    let d = Dir::new();
    let fam = d.generate(
        "random",
        "r.json",
        &["--seed", "5", "--parties", "3", "--components", "5"],
    );
    let m = d.s("m.json");
    let build = stdout_json(&lqhv(&["--json", "build", &fam, "-o", &m]));
    let first = stdout_json(&lqhv(&["--json", "verify", &m, &fam]));
    let second = stdout_json(&lqhv(&["--json", "verify", &m, &fam]));
    assert_eq!(without_timings(first.clone()), without_timings(second));
    assert_eq!(first["verification"], build["verification"]);
    assert_eq!(first["construction"], build["construction"]);
    assert_eq!(first["verification"]["max_error"], json!(0.0));

    // a second export of the same input is byte-identical
    let m2 = d.s("m2.json");
    lqhv(&["build", &fam, "-o", &m2]);
    assert_eq!(std::fs::read(&m).unwrap(), std::fs::read(&m2).unwrap());
}

#[test]
fn verify_rejects_a_foreign_family() {
    let d = Dir::new();
    let pr = d.generate("pr", "pr.json", &[]);
    let uni = d.generate("uniform", "u.json", &[]);
    let m = d.s("m.json");
    lqhv(&["build", &pr, "-o", &m]);
    let o = lqhv(&["--json", "verify", &m, &uni]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["verification"]["matches"], json!(false));
}

#[test]
fn generation_is_seeded() {
    let d = Dir::new();
    let a = d.generate("random", "a.json", &["--seed", "42"]);
    let b = d.generate("random", "b.json", &["--seed", "42"]);
    let c = d.generate("random", "c.json", &["--seed", "43", "--components", "6"]);
    assert_eq!(read_json(Path::new(&a)), read_json(Path::new(&b)));
    assert_ne!(read_json(Path::new(&a)), read_json(Path::new(&c)));
}

#[test]
fn tolerance_comes_from_the_environment() {
    let d = Dir::new();
    let nearly = json!({
        "parties": [{"settings": 2, "outcomes": 2}, {"settings": 1, "outcomes": 2}],
        "mode": "float",
        "tables": {
            "1,1": [0.25, 0.25, 0.25, 0.25],
            "2,1": [0.2500001, 0.2499999, 0.25, 0.25]
        }
    });
    let p = d.write("nearly.json", &nearly);
    assert_eq!(code(&lqhv(&["check", &p])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_lqhv"))
        .args(["check", &p])
        .env("LQHV_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(code(&lqhv(&["--tol", "1e-6", "check", &p])), 0);
    // rational mode compares exactly
    assert_eq!(code(&lqhv(&["--tol", "1e-6", "--mode", "rational", "check", &p])), 2);
}
