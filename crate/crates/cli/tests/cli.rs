use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn racopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_racopt"))
        .args(args)
        .env_remove("RACOPT_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn matrix_file(dir: &TempDir, name: &str, n: u32, d: u32, rows: &[&[u32]]) -> PathBuf {
    let path = dir.path().join(name);
    let body = serde_json::json!({ "n": n, "d": d, "rows": rows });
    std::fs::write(&path, body.to_string()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn value_of_majority_strategy() {
    let dir = TempDir::new().unwrap();
    let f = matrix_file(&dir, "maj.json", 2, 2, &[&[0, 0], &[1, 1]]);
    assert_eq!(stdout(&racopt(&["value", s(&f)])), "3/4 (0.75)\n");

    let json: Value = serde_json::from_str(&stdout(&racopt(&["value", s(&f), "--format", "json"]))).unwrap();
    assert_eq!(json["value"], "3/4");
    assert_eq!(json["method"], "WordEnumeration");

    let csv = stdout(&racopt(&["--format", "csv", "value", s(&f)]));
    assert_eq!(csv, "n,d,value,decimal,method\n2,2,3/4,0.75,WordEnumeration\n");
}

#[test]
fn optimal_value_cells() {
    assert_eq!(stdout(&racopt(&["optimal-value", "2", "5"])), "3/5 (0.6)\n");
    assert_eq!(stdout(&racopt(&["optimal-value", "1", "7"])), "1/1 (1.0)\n");
    assert_eq!(stdout(&racopt(&["optimal-value", "3", "3", "--digits", "3"])), "17/27 (0.63)\n");
}

#[test]
fn table_csv_and_json_agree() {
    let csv = stdout(&racopt(&["optimal-value", "--table", "6", "5", "--format", "csv"]));
    let json: Value =
        serde_json::from_str(&stdout(&racopt(&["optimal-value", "--table", "6", "5", "--format", "json"]))).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n\\d,1,2,3,4,5");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 6);
    for (i, line) in rows.iter().enumerate() {
        let cells: Vec<_> = line.split(',').collect();
        assert_eq!(cells[0], (i + 1).to_string());
        for (j, cell) in cells[1..].iter().enumerate() {
            assert_eq!(json["values"][i][j], *cell, "cell n={} d={}", i + 1, j + 1);
        }
    }
    assert_eq!(json["values"][1][1], "3/4");
}

#[test]
fn table_bounds_are_enforced() {
    for args in [["0", "3"], ["3", "1001"]] {
        let out = racopt(&["optimal-value", "--table", args[0], args[1]]);
        assert_eq!(out.status.code(), Some(2));
    }
}

#[test]
fn check_reports_gap() {
    let dir = TempDir::new().unwrap();
    let flat = matrix_file(&dir, "flat.json", 2, 2, &[&[0, 0], &[0, 0]]);
    let json: Value = serde_json::from_str(&stdout(&racopt(&["check", s(&flat), "--format", "json"]))).unwrap();
    assert_eq!(json["optimal"], false);
    assert_eq!(json["gap"], "1/4");

    let maj = matrix_file(&dir, "maj.json", 3, 3, &[&[0, 0, 0], &[1, 1, 1], &[2, 2, 2]]);
    let json: Value = serde_json::from_str(&stdout(&racopt(&["check", s(&maj), "--format", "json"]))).unwrap();
    assert_eq!(json["optimal"], true);
    assert_eq!(json["property1"], true);
    assert_eq!(json["gap"], "0/1");
}

#[test]
fn improve_output_recertifies() {
    let dir = TempDir::new().unwrap();
    let start = matrix_file(&dir, "start.json", 3, 3, &[&[0, 0, 1], &[0, 2, 1], &[0, 0, 1]]);
    let trace: Value = serde_json::from_str(&stdout(&racopt(&["improve", s(&start), "--format", "json"]))).unwrap();

    let values: Vec<&str> = trace["values"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(values.len(), trace["steps"].as_array().unwrap().len() + 1);
    assert_eq!(*values.last().unwrap(), "17/27");

    let final_path = dir.path().join("final.json");
    std::fs::write(&final_path, trace["final"].to_string()).unwrap();
    let check: Value =
        serde_json::from_str(&stdout(&racopt(&["check", s(&final_path), "--format", "json"]))).unwrap();
    assert_eq!(check["optimal"], true);
    assert_eq!(check["value"], "17/27");

    let again: Value = serde_json::from_str(&stdout(&racopt(&["improve", s(&final_path), "--format", "json"]))).unwrap();
    assert!(again["steps"].as_array().unwrap().is_empty());
    assert_eq!(again["final"], trace["final"]);
}

#[test]
fn improve_text_is_one_based() {
    let dir = TempDir::new().unwrap();
    let flat = matrix_file(&dir, "flat.json", 2, 2, &[&[0, 0], &[0, 0]]);
    let text = stdout(&racopt(&["improve", s(&flat)]));
    assert!(text.starts_with("initial: 11 11\n"), "{text}");
    assert!(text.contains("final: 22 11\n"), "{text}");
    assert!(text.contains("values: 1/2 -> 3/4 -> 3/4\n"), "{text}");
}

#[test]
fn count_agrees_with_oracle() {
    for (n, d, expected) in [("2", "2", "12"), ("5", "2", "32"), ("3", "3", "216")] {
        let json: Value =
            serde_json::from_str(&stdout(&racopt(&["count", n, d, "--oracle", "--format", "json"]))).unwrap();
        assert_eq!(json["count"], expected);
        assert_eq!(json["oracle_count"], expected);
        assert_eq!(json["verdict"], "AGREE");
    }
}

#[test]
fn count_without_closed_form() {
    let json: Value = serde_json::from_str(&stdout(&racopt(&["count", "1", "3", "--oracle", "--format", "json"]))).unwrap();
    assert!(json["count"].is_null());
    assert_eq!(json["oracle_count"], "6");
    assert_eq!(json["verdict"], "NO-FORMULA");
}

#[test]
fn oracle_cap_exits_three() {
    let out = racopt(&["count", "4", "4", "--oracle"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn word_cap_exits_three_and_reads_env() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<u32>> = (0..4).map(|y| vec![y; 20]).collect();
    let refs: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
    let big = matrix_file(&dir, "big.json", 20, 4, &refs);
    assert_eq!(racopt(&["value", s(&big)]).status.code(), Some(3));

    let small = matrix_file(&dir, "small.json", 2, 2, &[&[0, 0], &[1, 1]]);
    let out = Command::new(env!("CARGO_BIN_EXE_racopt"))
        .args(["value", s(&small)])
        .env("RACOPT_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&racopt(&["value", s(&small), "--cap", "4"])), "3/4 (0.75)\n");
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    for body in [
        r#"{"n":2}"#,
        r#"{"n":2,"d":2,"rows":[[0,0],[0,2]]}"#,
        r#"{"n":2,"d":2,"rows":[[0,0]]}"#,
        r#"{"n":2,"d":2,"rows":[[0,0],[0,-1]]}"#,
        "not json",
    ] {
        std::fs::write(&bad, body).unwrap();
        assert_eq!(racopt(&["value", s(&bad)]).status.code(), Some(2), "{body}");
    }
    assert_eq!(racopt(&["value", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(racopt(&["optimal-value", "0", "2"]).status.code(), Some(2));
    assert_eq!(racopt(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn merge_witness_strictly_loses() {
    let dir = TempDir::new().unwrap();
    let g = matrix_file(&dir, "g.json", 4, 3, &[&[0, 0, 0, 0], &[1, 1, 1, 1], &[2, 2, 2, 2]]);
    let json: Value = serde_json::from_str(&stdout(&racopt(&[
        "witness", "merge", s(&g), "--column", "0", "--row", "0", "--other-row", "1", "--format", "json",
    ])))
    .unwrap();
    let before = json["best_agreement"].as_u64().unwrap();
    let after = json["best_agreement_after_merge"].as_u64().unwrap();
    assert!(after < before);

    let out = racopt(&["witness", "merge", s(&g), "--column", "9", "--row", "0", "--other-row", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_witness() {
    let dir = TempDir::new().unwrap();
    let f = matrix_file(&dir, "f.json", 4, 2, &[&[0, 0, 0, 0], &[0, 0, 1, 1]]);
    let text = stdout(&racopt(&["witness", "binary", s(&f)]));
    assert_eq!(text, "witness: 2212\nbest agreement: 1\n");

    let ok = matrix_file(&dir, "ok.json", 4, 2, &[&[0, 0, 0, 1], &[1, 1, 1, 0]]);
    assert_eq!(racopt(&["witness", "binary", s(&ok)]).status.code(), Some(2));
}
