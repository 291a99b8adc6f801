use std::path::PathBuf;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn systems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn eq1() -> String {
    systems_dir().join("eq1.json").display().to_string()
}

fn trinomial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trinomial"))
        .args(args)
        .env("TRINOMIAL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn reduce_prints_kappa_and_partition() {
    let o = trinomial(&["reduce", "--system", &eq1(), "--pairs", "s0,s0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("kappa,\"[[2,1],[1,2]]\""), "{text}");
    assert!(text.contains("L,\"{1,2}\""));
    assert!(text.contains("J,\"{}\""));
}

#[test]
fn taylor_dump_has_six_coefficients() {
    let o = trinomial(&["taylor", "--system", &eq1(), "--d", "1,1", "--max-degree", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = body(&text);
    assert_eq!(rows[0], "k1,k2,coefficient");
    assert_eq!(rows.len(), 7);
    assert!(rows.contains(&"0,0,1"));
    assert!(rows.contains(&"1,0,-1/4"));
}

#[test]
fn header_carries_version_seed_and_hash() {
    let o = trinomial(&["taylor", "--system", &eq1(), "--d", "1,1", "--max-degree", "1", "--seed", "42"]);
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    let canonical = r#"{"n":2,"omega":[[4,0],[0,4]],"sigma":[[2,1],[1,2]]}"#;
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    assert_eq!(first, format!("# trinomial {} seed=42 input_sha256={hash}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn hash_ignores_formatting_of_the_input() {
    let path = std::env::temp_dir().join(format!("trinomial-eq1-{}.json", std::process::id()));
    std::fs::write(&path, "{ \"n\": 2,\n  \"omega\": [[4, 0], [0, 4]],\n  \"sigma\": [[2, 1], [1, 2]] }\n").unwrap();
    let a = stdout(&trinomial(&["reduce", "--system", path.to_str().unwrap(), "--pairs", "w0,w0"]));
    let b = stdout(&trinomial(&["reduce", "--system", &eq1(), "--pairs", "w0,w0"]));
    std::fs::remove_file(&path).ok();
    assert_eq!(a.lines().next(), b.lines().next());
}

#[test]
fn verify_passes_near_origin() {
    let o = trinomial(&[
        "verify", "--system", &eq1(), "--d", "1,1", "--x", "0.1,0.1", "--max-degree", "20", "--tol", "1e-8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "PASS"));
}

#[test]
fn verify_failure_is_numerical() {
    let o = trinomial(&[
        "verify", "--system", &eq1(), "--d", "1,1", "--x", "0.9,0.9", "--max-degree", "3", "--tol", "1e-12",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l == "FAIL"));
}

#[test]
fn verify_puiseux_far_from_origin() {
    let o = trinomial(&[
        "verify", "--system", &eq1(), "--pairs", "s0,w0", "--d", "1,1", "--x", "20,1", "--max-degree", "40", "--tol",
        "1e-5", "--steps", "400",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(trinomial(&["taylor", "--system", &eq1(), "--d", "1"]).status.code(), Some(2));
    assert_eq!(trinomial(&["taylor", "--system", "/nonexistent.json", "--d", "1,1"]).status.code(), Some(2));
    assert_eq!(trinomial(&["reduce", "--system", &eq1(), "--pairs", "s0,xx"]).status.code(), Some(2));
    assert_eq!(trinomial(&["reduce", "--system", &eq1(), "--pairs", "s0,s0", "--bogus"]).status.code(), Some(2));
    let o = trinomial(&["mb-residues", "--system", &eq1(), "--d", "1,1", "--pairing", "2,3|3,4", "--rays", "1,0;0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[mellinbarnes]"));
}

#[test]
fn eval_reports_every_branch() {
    let o = trinomial(&["eval", "--system", &eq1(), "--pairs", "s0,s0", "--d", "1,1", "--x", "10,10", "--max-degree", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# branches=3"));
    let rows = body(&text);
    assert_eq!(rows.len(), 4);
    // (re, im) with 17 significant digits
    let value = rows[1].split_once(',').unwrap().1;
    assert!(value.starts_with("\"(") && value.contains("e-1, "), "{value}");
}

#[test]
fn json_output_parses() {
    let o = trinomial(&["puiseux", "--system", &eq1(), "--pairs", "s0,s0", "--d", "1,1", "--max-degree", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["coefficients"][0]["m"], serde_json::json!(["-1/3", "-1/3"]));
    assert_eq!(v["branch_count"], 3);
    assert_eq!(v["meta"]["seed"], 0);
}

#[test]
fn mb_residues_match_closed_form() {
    let o = trinomial(&[
        "mb-residues", "--system", &eq1(), "--d", "1,1", "--pairing", "2,3|1,4", "--rays", "2,-1;-1,2", "--bound", "1",
        "--nonzero",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = body(&text);
    assert_eq!(rows[0], "k1,k2,families,z1,z2,residue");
    assert!(rows.contains(&"0,0,3;4,1/3,1/3,1"));
}

#[test]
fn amoeba_scan_is_reproducible() {
    let path = systems_dir().join("quadratic.json").display().to_string();
    let args = ["amoeba", "--system", &path, "--lower", "-1", "--upper", "2", "--resolution", "0.1", "--attempts", "20", "--seed", "3"];
    let a = stdout(&trinomial(&args));
    let b = stdout(&trinomial(&args));
    assert_eq!(a, b);
    let members: Vec<f64> = body(&a)[1..]
        .iter()
        .filter(|l| l.split(',').nth(1) == Some("1"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!members.is_empty());
    assert!(members.iter().all(|r| (r - 2f64.ln()).abs() <= 0.1));
}

#[test]
fn output_file_option() {
    let path = std::env::temp_dir().join(format!("trinomial-out-{}.csv", std::process::id()));
    let o = trinomial(&["taylor", "--system", &eq1(), "--d", "1,1", "--max-degree", "1", "-o", path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(body(&text).len(), 4);
}
