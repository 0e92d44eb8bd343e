use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slitstrip")).args(args).env("SLITSTRIP_THREADS", "2").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fusion_reports_both_routes() {
    let v = json(&run(&["fusion", "--width", "4", "--alpha", "1", "--beta-left", "1", "--beta-right", "", "--method", "both"]));
    let r = &v["result"];
    assert_eq!(r["key"], "1;1;");
    assert!(r["difference"].as_f64().unwrap() < 1e-9);
    assert!(r["B_vacuum"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config"]["fusion"]["width"], 4);
}

#[test]
fn continuum_routes_agree() {
    let v = json(&run(&["continuum", "--alpha", "1,3", "--beta-left", "1", "--beta-right", "1", "--method", "both"]));
    let r = &v["result"];
    assert!(r["difference"].as_f64().unwrap() < 1e-6);
    assert!((r["value"].as_f64().unwrap() + 0.9375).abs() < 1e-6);
    assert!(r["quadrature"]["nodes"].as_u64().unwrap() >= 32);
}

#[test]
fn oracle_gap_is_tiny() {
    let v = json(&run(&["oracle", "--width", "2", "--ht", "1", "--hb", "1", "--slit"]));
    assert!(v["result"]["gap"]["Z"].as_f64().unwrap() < 1e-10);
    assert!(v["result"]["gap"]["correlation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn diagonalize_lists_every_mode() {
    let v = json(&run(&["diagonalize", "--width", "5"]));
    assert_eq!(v["result"]["modes"].as_array().unwrap().len(), 5);
    assert!(v["result"]["gram_error"].as_f64().unwrap() < 1e-11);
}

#[test]
fn converge_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for (p, threads) in paths.iter().zip(["1", "4"]) {
        let out = Command::new(env!("CARGO_BIN_EXE_slitstrip"))
            .args(["converge", "--widths", "4,8,16", "--keys", "1;;1", "--out", p.to_str().unwrap()])
            .env("SLITSTRIP_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("width,quantity,discrete,continuum,gap\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["fusion", "--width", "4", "--alpha", "2"]).status.code(), Some(2));
    assert_eq!(run(&["fusion", "--width", "4", "--alpha", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["fusion", "--width", "2", "--alpha", "5"]).status.code(), Some(2));
    assert_eq!(run(&["converge", "--widths", "5", "--keys", "1;;1"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    let slow = run(&["continuum", "--alpha", "1,3,5", "--beta-left", "1,3", "--beta-right", "1", "--tol", "1e-300", "--method", "pfaffian"]);
    assert_eq!(slow.status.code(), Some(3));
}
