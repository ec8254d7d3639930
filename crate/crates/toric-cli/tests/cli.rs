use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn toric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric")).args(args).env_remove("TORIC_SEED").output().unwrap()
}

fn toric_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_toric"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

#[test]
fn invariants_cube_faces() {
    let o = toric(&["invariants", &path("cube_faces.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["nV"], 2);
    assert_eq!(v["mixed_area_exact"], "3");
    assert_eq!(v["strongly_mixed"], false);
    assert_eq!(v["version"], "1");
}

#[test]
fn invariants_planar_gaps_supports_only() {
    let o = toric(&["invariants", &path("planar_gaps.json")]);
    assert_eq!(o.status.code(), Some(0));
    let eta = json(&o)["eta"].as_f64().unwrap();
    assert!((eta - 2.0 * 5f64.sqrt() / 5.0).abs() < 1e-12);
}

#[test]
fn solve_then_certify_round_trip() {
    let o = toric(&["solve", "--target", &path("cube_faces.json"), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let roots = json(&o);
    assert_eq!(roots["roots"].as_array().unwrap().len(), 2);
    let c = toric_stdin(&["certify", "--system", &path("cube_faces.json"), "--roots", "-"], &o.stdout);
    assert_eq!(c.status.code(), Some(0));
    for r in json(&c)["roots"].as_array().unwrap() {
        assert_eq!(r["certificate"]["passed"], true);
        assert!(r["certificate"]["alpha_hat"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn solve_is_deterministic_and_reads_env_seed() {
    let a = toric(&["solve", "--target", &path("cube_faces.json"), "--seed", "3"]);
    let b = toric(&["solve", "--target", &path("cube_faces.json"), "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_toric"))
        .args(["solve", "--target", &path("cube_faces.json")])
        .env("TORIC_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn certify_rejects_a_non_root() {
    let fake = r#"{"version":"1","system_hash":"","roots":[{"re":[0.3,0.1,-0.2],"im":[1.0,2.0,0.5],
        "certificate":{"beta":1.0,"mu":1.0,"nu":2.0,"alpha_hat":1.0,"passed":true,"target_alpha":0.07}}]}"#;
    let o = toric_stdin(&["certify", "--system", &path("cube_faces.json"), "--roots", "-"], fake.as_bytes());
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr.split(|&b| b == b'\n').find(|l| l.starts_with(b"{\"error")).unwrap().to_vec()).unwrap();
    assert_eq!(err["error"], "CertificateFailed");
}

#[test]
fn oracle_dense() {
    let o = toric(&["oracle", &path("dense3-system.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["roots"].as_array().unwrap().len(), 9);
}

#[test]
fn sample_then_track() {
    let dir = std::env::temp_dir().join(format!("toric-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let start = dir.join("g.json");
    let o = toric(&["sample", &path("planar_gaps.json"), "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&start, &o.stdout).unwrap();
    let target = dir.join("f.json");
    std::fs::write(&target, toric(&["sample", &path("planar_gaps.json"), "--seed", "6"]).stdout).unwrap();
    let t = toric(&["track", "--start", start.to_str().unwrap(), "--target", target.to_str().unwrap()]);
    assert_eq!(t.status.code(), Some(0), "{}", String::from_utf8_lossy(&t.stderr));
    let paths = json(&t)["paths"].as_array().unwrap().clone();
    assert!(!paths.is_empty());
    assert!(paths.iter().all(|p| p["end"]["certificate"]["passed"] == true));
}

#[test]
fn montecarlo_writes_csv() {
    let csv = std::env::temp_dir().join(format!("toric-mc-{}.csv", std::process::id()));
    let o = toric(&["montecarlo", "--preset", "exclusion-n1", "--samples", "2000", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    assert_eq!(v["pass"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("sample,value"));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(toric(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(toric(&["solve"]).status.code(), Some(1));
    let o = toric(&["invariants", "/nonexistent/system.json"]);
    assert_eq!(o.status.code(), Some(1));
    let bad = toric_stdin(&["invariants", "-"], br#"{"version":"1","n":2,"supports":[[[0,0],[1,0]]]}"#);
    assert_eq!(bad.status.code(), Some(1));
    let err: Value = serde_json::from_slice(bad.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "Parse");
    assert_eq!(toric(&["--help"]).status.code(), Some(0));
}
