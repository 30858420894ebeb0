mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use rqmc_core::GeneratorSet;
use serde_json::Value;

fn rqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(name)
        .display()
        .to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn audit(args: &[&str]) -> Value {
    let out = rqmc(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn subset<'a>(doc: &'a Value, u: &str) -> &'a Value {
    doc["subsets"]
        .as_array()
        .unwrap()
        .iter()
        .find(|q| q["u"] == u)
        .unwrap()
}

#[test]
fn audit_van_der_corput() {
    let doc = audit(&["net-audit", "--s", "1", "--m", "8"]);
    assert_eq!(doc["t"], 0);
    assert_eq!(subset(&doc, "{1}")["t_star"], 0);
    assert_eq!(doc["tms_verified"], true);
    assert_eq!(doc["config"]["command"], "net-audit");
}

#[test]
fn audit_duplicated_identity() {
    let doc = audit(&["net-audit", "--matrices", &fixture("fixtures/dup_identity.txt")]);
    assert_eq!(doc["m"], 8);
    assert_eq!(doc["t"], 7);
    assert_eq!(subset(&doc, "{1,2}")["t_star"], 7);
    assert_eq!(doc["t_star"]["{1,2}"], 7);
    assert_eq!(doc["t_star"]["{1}"], 0);
}

#[test]
fn audit_direction_file_matches_builtin() {
    let from_file = audit(&["net-audit", "--s", "5", "--m", "7", "--dirs", &fixture("fixtures/joe_kuo_excerpt.txt")]);
    let builtin = audit(&["net-audit", "--s", "5", "--m", "7"]);
    assert_eq!(from_file["subsets"], builtin["subsets"]);
    assert_eq!(from_file["t"], builtin["t"]);
    let source = from_file["config"]["source"].as_str().unwrap();
    assert!(source.ends_with(":2-5"), "{source}");
}

#[test]
fn missing_file_is_input_error() {
    let out = rqmc(&["net-audit", "--s", "2", "--dirs", "/no/such/table.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/table.txt"));
}

#[test]
fn malformed_file_names_line() {
    let path = fixture("fixtures/bad_direction.txt");
    let out = rqmc(&["net-audit", "--s", "3", "--dirs", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("{path}:3:")));
}

#[test]
fn out_of_range_is_input_error() {
    assert_eq!(rqmc(&["net-audit", "--s", "11", "--m", "4"]).status.code(), Some(2));
    assert_eq!(rqmc(&["net-audit", "--s", "1", "--m", "40"]).status.code(), Some(2));
    assert_eq!(rqmc(&["net-audit", "--bogus"]).status.code(), Some(2));
}

#[test]
fn gain_table_header_only() {
    let out = rqmc(&["gain-table", "--s", "2", "--m", "3", "--ncap", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(data_lines(&text), vec!["k1,k2,norm1,probability,cap,within_cap"]);
    assert!(text.contains("# violations: 0"));
}

#[test]
fn gain_table_golden() {
    let golden = std::fs::read_to_string(fixture("golden/gain_s2_m3.csv")).unwrap();
    let out = rqmc(&["gain-table", "--s", "2", "--m", "3", "--E", "3", "--ncap", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden);

    // Every probability in the golden file equals the exhaustive frequency.
    let g = GeneratorSet::sobol(2, 3, 3).unwrap();
    let scrambles = common::all_scrambles(2, 3, 4);
    let rows = data_lines(&golden);
    assert_eq!(rows.len() - 1, 20);
    for row in &rows[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        let k = [cells[0].parse().unwrap(), cells[1].parse().unwrap()];
        let (hits, total) = common::gain_frequency(&g, &k, &scrambles);
        assert!(common::frequency_matches(hits, total, cells[3]), "{row}: {hits}/{total}");
    }
}

#[test]
fn gain_table_budget() {
    let out = rqmc(&["gain-table", "--s", "6", "--m", "8", "--ncap", "60"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn counts_small() {
    let out = rqmc(&["counts", "--s", "1", "--ncap", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let counts: Vec<&str> = data_lines(&text)[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(counts, vec!["1", "1", "2", "2"]);
}

#[test]
fn counts_bounds_hold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.csv");
    let out = rqmc(&["counts", "--s", "2", "--ncap", "300", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 301);
    for row in &rows[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        let count: f64 = cells[2].parse().unwrap();
        assert!(count < cells[3].parse::<f64>().unwrap(), "{row}");
    }
}

#[test]
fn counts_empty() {
    let out = rqmc(&["counts", "--s", "2", "--ncap", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_lines(&stdout(&out)), vec!["s,N,count,bound_thm6,bound_cor5"]);
}

#[test]
fn converge_constant_is_exact() {
    let out = rqmc(&[
        "converge", "--s", "2", "--integrand", "constant", "--m-range", "2..4", "--r", "2", "--seed", "1", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows = data_lines(&text);
    assert_eq!(rows[0], "integrand,s,m,n,method,r,seed,estimate,abs_error");
    assert_eq!(rows.len() - 1, 3 * 2 * 2);
    assert!(rows[1..].iter().all(|r| r.ends_with(",0e0")));
}

#[test]
fn converge_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |p: &str| {
        vec![
            "converge".to_string(),
            "--m-range".into(),
            "3..6".into(),
            "--r".into(),
            "3".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            p.to_string(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let owned = args(p.to_str().unwrap());
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        assert_eq!(rqmc(&refs).status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("# config: "));
    assert!(text.contains("# summary: method,m,median_abs_error,rate"));
}

#[test]
fn converge_unknown_integrand() {
    let out = rqmc(&["converge", "--integrand", "otl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("otl"));
}
