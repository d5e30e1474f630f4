use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SZ: &str = r#"{"dim":2,"rows":[[1,0],[0,-1]]}"#;
const SX: &str = r#"{"dim":2,"rows":[[0,1],[1,0]]}"#;
const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

struct Workdir {
    dir: TempDir,
}

impl Workdir {
    fn new() -> Workdir {
        let w = Workdir {
            dir: TempDir::new().unwrap(),
        };
        w.write("sz.json", SZ);
        w.write("sx.json", SX);
        w.write("up.json", r#"{"pure":[1,0]}"#);
        w.write("plus.json", &format!(r#"{{"pure":[{H},{H}]}}"#));
        w.write("had.json", &format!(r#"{{"dim":2,"rows":[[{H},{H}],[{H},{}]]}}"#, -H));
        w
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, None)
    }

    fn run_env(&self, args: &[&str], tolerance: Option<&str>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qlogic"));
        cmd.current_dir(self.path()).args(args).env_remove("QLOGIC_TOLERANCE");
        if let Some(t) = tolerance {
            cmd.env("QLOGIC_TOLERANCE", t);
        }
        cmd.output().unwrap()
    }

    fn json(&self, args: &[&str]) -> Value {
        let mut full = vec!["--json"];
        full.extend_from_slice(args);
        let out = self.run(&full);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }
}

fn strings(v: &Value) -> Vec<String> {
    let mut out: Vec<String> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect();
    out.sort();
    out
}

#[test]
fn ctx_build_gives_three_contexts() {
    let w = Workdir::new();
    let out = w.run(&["ctx", "build", "--gen", "sz.json", "sx.json", "--down-close"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("3 contexts, down-closed: true"), "{text}");

    let dump = w.json(&["ctx", "build", "--gen", "sz.json", "sx.json"]);
    let labels: Vec<&str> = dump["contexts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["C1", "sz", "sx"]);
}

#[test]
fn truth_sieves_for_spin_up() {
    let w = Workdir::new();
    let args = |variant| {
        [
            "truth", "--state", "up.json", "--op", "sz.json", "--delta", "(0.5,1.5)", "--variant", variant, "--gen",
            "sz.json", "sx.json",
        ]
    };
    let co = w.json(&args("covariant"));
    assert_eq!(strings(&co["sieve"]), ["sz"]);
    let contra = w.json(&args("contravariant"));
    assert_eq!(strings(&contra["sieve"]), ["C1", "sx", "sz"]);
}

#[test]
fn daseinisation_of_sigma_x_at_sigma_z() {
    let w = Workdir::new();
    let out = w.json(&["das", "--op", "sx.json", "--context", "sz.json"]);
    // σ_x shares no eigenvector with σ_z: δ^o = I, δ^i = -I.
    assert_eq!(out["outer"]["values"], serde_json::json!([1.0, 1.0]));
    assert_eq!(out["inner"]["values"], serde_json::json!([-1.0, -1.0]));
    let plain = w.run(&["das", "--op", "sx.json", "--context", "sz.json"]);
    assert!(plain.status.success());
}

#[test]
fn heyting_round_trip() {
    let w = Workdir::new();
    let poset = w.json(&["ctx", "build", "--gen", "sz.json", "sx.json"]);
    w.write("poset.json", &poset.to_string());
    let prop = w.json(&[
        "prop", "--op", "sz.json", "--delta", "(0.5,1.5)", "--variant", "contravariant", "--poset", "poset.json",
    ]);
    w.write("a.json", &prop.to_string());
    let neg = w.json(&["heyting", "neg", "--poset", "poset.json", "--a", "a.json"]);
    w.write("na.json", &neg.to_string());
    // S ∧ ¬S = ⊥ and S ⇒ ¬¬S = ⊤.
    let meet = w.json(&["heyting", "meet", "--poset", "poset.json", "--a", "a.json", "--b", "na.json"]);
    assert!(meet["family"].as_object().unwrap().values().all(|v| v.as_array().unwrap().is_empty()));
    let nn = w.json(&["heyting", "neg", "--poset", "poset.json", "--a", "na.json"]);
    w.write("nna.json", &nn.to_string());
    let imp = w.json(&["heyting", "impl", "--poset", "poset.json", "--a", "a.json", "--b", "nna.json"]);
    for atoms in imp["family"].as_object().unwrap().values() {
        assert!(!atoms.as_array().unwrap().is_empty(), "S ⇒ ¬¬S should be the top element");
    }
}

#[test]
fn dyn_reports_equivalence() {
    let w = Workdir::new();
    for variant in ["contravariant", "covariant"] {
        let out = w.json(&[
            "dyn", "--unitary", "had.json", "--op", "sz.json", "--delta", "(0.5,1.5)", "--state", "plus.json",
            "--variant", variant,
        ]);
        assert_eq!(out["equivalent"], Value::Bool(true), "{out}");
    }
}

#[test]
fn check_passes_and_is_deterministic() {
    let w = Workdir::new();
    let args = ["--json", "check", "--seed", "7", "--trials", "8"];
    let first = w.run(&args);
    let second = w.run(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(first.stdout, second.stdout);
    let other = w.run(&["--json", "check", "--seed", "8", "--trials", "8"]);
    assert!(other.status.success());
}

#[test]
fn missing_file_exits_one() {
    let w = Workdir::new();
    let out = w.run(&["das", "--op", "nope.json", "--context", "sz.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));

    let out = w.run(&["--json", "das", "--op", "nope.json", "--context", "sz.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "input");
}

#[test]
fn malformed_inputs_exit_one() {
    let w = Workdir::new();
    w.write("bad.json", "{not json");
    w.write("nonherm.json", r#"{"dim":2,"rows":[[0,1],[0,0]]}"#);
    for args in [
        vec!["das", "--op", "bad.json", "--context", "sz.json"],
        vec!["das", "--op", "nonherm.json", "--context", "sz.json"],
        vec!["prop", "--op", "sz.json", "--delta", "(1,0", "--variant", "covariant", "--gen", "sz.json"],
    ] {
        let out = w.run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn bad_tolerance_env_exits_one() {
    let w = Workdir::new();
    let out = w.run_env(&["ctx", "build", "--gen", "sz.json"], Some("bogus"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("QLOGIC_TOLERANCE"));
    let ok = w.run_env(&["ctx", "build", "--gen", "sz.json"], Some("1e-9"));
    assert!(ok.status.success());
}
