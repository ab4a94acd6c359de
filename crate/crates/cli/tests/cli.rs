use std::process::{Command, Output};

use serde_json::Value;

fn zdense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdense")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn pi_for_rho_seven() {
    let out = zdense(&["pi", "--catalog", "rho_F:7"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["command"], "pi");
    assert_eq!(v["result"]["pi_tilde"], serde_json::json!([3, 5, 19]));
    assert!(v["errors"].as_array().unwrap().is_empty());
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn image_order_mod_eight() {
    let v = json_of(&zdense(&["image-order", "--catalog", "h1:2", "--mod", "8"]));
    assert_eq!(v["result"]["order"], "12288");
}

#[test]
fn ladder_at_three() {
    let v = json_of(&zdense(&["ladder", "--catalog", "rho_F:7", "--prime", "3", "--max-e", "4"]));
    assert_eq!(v["result"]["orders"], serde_json::json!(["9", "243", "6561", "531441"]));
    assert_eq!(v["result"]["exponents"], serde_json::json!([3, 3, 4]));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = zdense(&["pi", "--catalog", "h2:12", "--seed", "7"]);
    let b = zdense(&["pi", "--catalog", "h2:12", "--seed", "7", "--threads", "2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn witnesses_recheck() {
    let dir = std::env::temp_dir().join(format!("zdense-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("report.json");
    let out = zdense(&["pi", "--catalog", "h1:5", "--output", report.to_str().unwrap()]);
    assert!(out.status.success());
    let check = zdense(&["check-witness", report.to_str().unwrap()]);
    assert!(check.status.success());
    assert_eq!(json_of(&check)["all_verified"], true);
}

#[test]
fn corrupted_golden_file_fails() {
    let dir = std::env::temp_dir().join(format!("zdense-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("golden.json");
    std::fs::write(&path, r#"{"rows":[{"family":"rho","group":"rho_F:7","pi_tilde":[3,5]}]}"#).unwrap();
    let out = zdense(&["corpus", "--golden", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["all_match"], false);
}

#[test]
fn rho_corpus_matches() {
    let out = zdense(&["corpus", "--family", "rho"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn symplectic_group_is_not_dense() {
    let out = zdense(&["pi-transvection", "--catalog", "sp4:0", "--t", "g1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!json_of(&out)["errors"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_catalog_entry_is_an_error() {
    let out = zdense(&["pi", "--catalog", "nope:1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn text_format() {
    let out = zdense(&["pi", "--catalog", "rho_F:1", "--format", "text"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("pi_tilde = {2, 3}"), "{s}");
}
