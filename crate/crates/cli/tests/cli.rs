use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.dsys"))
}

fn prolong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prolong")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

#[test]
fn insoluble_system_exits_one() {
    let out = prolong(&["check", corpus("hrushovski").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["verdict"], "insoluble");
    assert_eq!(report["schema"], "prolong-report/1");
}

#[test]
fn soluble_system_reports_r() {
    let out = prolong(&["check", corpus("sec43").to_str().unwrap(), "--triangles"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["verdict"], "soluble");
    assert_eq!(report["witness"]["r"], 3);
    assert!(!report["triangles"].as_array().unwrap().is_empty());
}

#[test]
fn text_explanation_names_the_clash() {
    let out = prolong(&["check", corpus("hrushovski").to_str().unwrap(), "--format", "text"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("∂_1∂_0c = 2 but ∂_0∂_1c = 0"));
}

#[test]
fn parallel_check_takes_the_worst_code() {
    let (a, b) = (corpus("sec43"), corpus("my_ex1_n2"));
    let out = prolong(&["check", a.to_str().unwrap(), b.to_str().unwrap(), "--jobs", "2", "--format", "text"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn saturate_draws_the_triangle() {
    let out = prolong(&["saturate", corpus("my_ex_n2").to_str().unwrap(), "--height", "5", "--format", "text"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("a b c a b c\nd e f d e\nb c a b\ne f d\nc a\nf\n"));
}

#[test]
fn leaders_and_commutation() {
    let out = prolong(&["leaders", corpus("charp3").to_str().unwrap(), "--height", "2"]);
    assert_eq!(code(&out), 0);
    let kinds: Vec<String> = json(&out)["leaders"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["kind"].as_str().unwrap().to_string())
        .collect();
    assert!(kinds.iter().any(|k| k == "inseparable"));
    let out = prolong(&["forms", "commutation", corpus("hrushovski").to_str().unwrap(), "--format", "text"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("d1(c) = 1"));
}

#[test]
fn bound_values() {
    let out = prolong(&["bound", "--m", "2", "--n", "1", "--r", "1"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["chain_bound"], "17");
    assert_eq!(report["s"], "131072");
    assert_eq!(code(&prolong(&["bound", "--m", "2", "--n", "2", "--r", "1"])), 70);
}

#[test]
fn replay_round_trip() {
    let out = prolong(&["check", corpus("my_ex_n2").to_str().unwrap()]);
    let dir = std::env::temp_dir().join(format!("prolong-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let replayed = prolong(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&replayed), 0);
    assert_eq!(stdout(&replayed).trim(), "valid");
    let mut report = json(&out);
    report["certificate"]["height"] = Value::from(99);
    std::fs::write(&path, report.to_string()).unwrap();
    assert_eq!(code(&prolong(&["replay", path.to_str().unwrap()])), 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn schema_is_printed() {
    let out = prolong(&["schema"]);
    assert_eq!(code(&out), 0);
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
}

#[test]
fn failure_codes() {
    assert_eq!(code(&prolong(&["check"])), 64);
    assert_eq!(code(&prolong(&["frobnicate"])), 64);
    assert_eq!(code(&prolong(&["check", "/nonexistent/system.dsys"])), 66);
    let dir = std::env::temp_dir().join(format!("prolong-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.dsys");
    std::fs::write(&bad, "derivations: 2\nunknowns: x\nD0 x = = y\n").unwrap();
    assert_eq!(code(&prolong(&["check", bad.to_str().unwrap()])), 65);
    std::fs::remove_dir_all(&dir).ok();
}
