use std::path::PathBuf;
use std::process::{Command, Output};

use logcoh::pipeline::Report;
use logcoh::{Poly, Vars};
use serde_json::Value;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn logcoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logcoh"))
        .args(args)
        .env_remove("LOGCOH_DEGREE_CAP")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn dims(v: &Value) -> [u64; 3] {
    let d = &v["dims"];
    [d["h0"].as_u64().unwrap(), d["h1"].as_u64().unwrap(), d["h2"].as_u64().unwrap()]
}

#[test]
fn cusp_full_json() {
    let out = logcoh(&["full", "--f", "x^2 - y^3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // the complement of a cuspidal cubic has the Betti numbers of a circle
    assert_eq!(dims(&v), [1, 1, 0]);
    assert_eq!(v["exit_code"], 0);
}

#[test]
fn text_output_lists_dims() {
    let out = logcoh(&["full", "--f", "x*y"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("H2"), "{text}");
}

#[test]
fn not_free_needs_a_basis() {
    let f = "(x^3+y^4+x*y^3)*(x^2+y^2)";
    let out = logcoh(&["full", "--f", f, "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(json(&out)["error"].is_string());

    let basis = corpus().join("imported_basis.basis.json");
    let out = logcoh(&["full", "--f", f, "--basis-file", basis.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(dims(&json(&out)), [1, 3, 7]);
}

#[test]
fn fast_h2_on_a_table_row() {
    let out = logcoh(&["h2", "--f", "x^10 + y^11 + x*y^10", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let h2 = &v["h2"];
    assert_eq!(h2["dim"], 8, "{v}");
    assert_eq!(h2["basis"].as_array().unwrap().len(), 8);
}

#[test]
fn error_exit_codes() {
    assert_eq!(logcoh(&["full", "--f", "x^2+"]).status.code(), Some(5));
    assert_eq!(logcoh(&["full", "--f", "x^2*y"]).status.code(), Some(2));
    assert_eq!(logcoh(&["full", "--f", "7"]).status.code(), Some(5));
    // clap rejects out-of-range arguments before any computation
    assert_eq!(logcoh(&["full", "--f", "x", "--check-level", "3"]).status.code(), Some(2));
}

#[test]
fn degree_cap_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_logcoh"));
        cmd.args(["full", "--f", "x^2 - y^3", "--format", "json"]).env_remove("LOGCOH_DEGREE_CAP");
        if let Some(e) = env {
            cmd.env("LOGCOH_DEGREE_CAP", e);
        }
        if let Some(c) = flag {
            cmd.args(["--degree-cap", c]);
        }
        cmd.output().unwrap().status.code()
    };
    let starved = run(Some("0"), None);
    assert_ne!(starved, Some(0));
    assert_eq!(starved, run(None, Some("0")));
    // the flag wins over the environment
    assert_eq!(run(Some("0"), Some("12")), Some(0));
}

#[test]
fn corpus_mode_reports_every_file() {
    let out = logcoh(&["full", "--corpus", corpus().to_str().unwrap(), "--format", "json"]);
    let v = json(&out);
    let runs = v.as_array().unwrap();
    let files: Vec<&str> = runs.iter().map(|r| r["file"].as_str().unwrap()).collect();
    assert!(files.iter().any(|f| f.contains("three_lines")));
    for r in runs {
        let name = r["file"].as_str().unwrap();
        if name.contains("three_lines") {
            assert_eq!(dims(&r["report"]), [1, 3, 2]);
        }
        if name.contains("imported_basis") {
            assert_eq!(dims(&r["report"]), [1, 3, 7]);
        }
    }
    let worst = runs.iter().map(|r| r["report"]["exit_code"].as_i64().unwrap()).max().unwrap();
    assert_eq!(out.status.code(), Some(worst as i32));
}

#[test]
fn reports_round_trip_through_json() {
    let out = logcoh(&["full", "--f", "x*y*(x-y)", "--format", "json"]);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let again: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);
    let basis = report.basis.expect("basis block");
    let vars = Vars::xy();
    let strings = basis.h0.iter().chain(basis.h1.iter().flatten()).chain(&basis.h2);
    for g in strings {
        let p = Poly::parse(g, &vars).unwrap();
        assert_eq!(Poly::parse(&p.to_string(), &vars).unwrap(), p);
    }
}
