use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fullerene_magic::constants::MagicPair;
use fullerene_magic::graph::builtin;
use fullerene_magic::pca::{pca, SolutionMatrix};
use fullerene_magic::search::{enumerate, SearchOptions};
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fullerene-magic");

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run-manifest.json")).unwrap()).unwrap()
}

#[test]
fn feasible_lists_twelve_pairs() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["feasible", "--builtin", "c24"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 12);
    assert_eq!(v["pairs"][0], serde_json::json!({"sp": 68, "sh": 42}));
    let again = run_in(dir.path(), &["feasible", "--builtin", "c24"]);
    assert_eq!(out.stdout, again.stdout);

    let csv = stdout(&run_in(dir.path(), &["feasible", "--builtin", "c26", "--format", "csv"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sp,sh");
    assert_eq!(lines.len(), 13);
    assert!(lines.contains(&"73,59"));
}

#[test]
fn c20_count_is_an_empty_table() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["count", "--builtin", "c20"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["rows"], serde_json::json!([]));
    assert!(v["reason"].as_str().unwrap().contains("no integer solution"));
}

#[test]
fn pair_off_the_relation_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["enumerate", "--builtin", "c24", "--sp", "57", "--sh", "107"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("infeasible"));
    assert_eq!(manifest(dir.path())["exit_code"], 3);
    let out = run_in(dir.path(), &["count", "--builtin", "c20", "--sp", "52", "--sh", "0"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    for args in [
        &[][..],
        &["count"],
        &["count", "--builtin", "c24", "--graph", "x.json"],
        &["count", "--builtin", "c30"],
        &["count", "--builtin", "c24", "--sp", "57"],
        &["enumerate", "--builtin", "c24"],
        &["count", "--builtin", "c24", "--format", "xml"],
    ] {
        assert_eq!(code(&run_in(dir.path(), args)), 1, "{args:?}");
    }
    // Needs either an inline enumeration or a solution file.
    let out = run_in(dir.path(), &["orbits", "--builtin", "c24", "--sp", "57", "--sh", "108"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--store-solutions"));
    assert_eq!(code(&run_in(dir.path(), &["validate", "--graph", "missing.json"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["--help"])), 0);
}

#[test]
fn invalid_graph_file_fails_validation() {
    let dir = TempDir::new().unwrap();
    let mut faces = builtin("C24").unwrap().faces_one_based();
    faces.pop();
    let text = serde_json::json!({ "n": 24, "faces": faces }).to_string();
    fs::write(dir.path().join("bad.json"), text).unwrap();
    let out = run_in(dir.path(), &["validate", "--graph", "bad.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pentagons"), "{}", stderr(&out));
    fs::write(dir.path().join("junk.json"), "{ not json").unwrap();
    assert_eq!(code(&run_in(dir.path(), &["validate", "--graph", "junk.json"])), 2);
}

#[test]
fn graph_files_work_like_builtins() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c24.json"), builtin("C24").unwrap().to_json()).unwrap();
    let out = run_in(dir.path(), &["validate", "--graph", "c24.json", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "valid,n,pentagons,hexagons,edges\ntrue,24,12,2,36\n");
    let out = run_in(dir.path(), &["count", "--graph", "c24.json", "--sp", "57", "--sh", "108", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("sp,sh,count,partial,nodes\n57,108,576,false,"));
    assert_eq!(manifest(dir.path())["graph_source"], "c24.json");
}

#[test]
fn manifest_lists_outputs() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &["count", "--builtin", "c24", "--sp", "58", "--sh", "102", "--workers", "2", "--out", "res/table.json"],
    );
    assert_eq!(code(&out), 0);
    let m = manifest(&dir.path().join("res"));
    assert_eq!(m["command"], "count");
    assert_eq!(m["graph_source"], "builtin:C24");
    assert_eq!(m["workers"], 2);
    assert_eq!(m["partial"], false);
    assert_eq!(m["outputs"], serde_json::json!(["res/table.json"]));
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["parameters"]["count"]["sp"], 58);
    let table: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("res/table.json")).unwrap()).unwrap();
    assert_eq!(table["rows"][0]["count"], 936);
}

#[test]
fn node_budget_gives_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["count", "--builtin", "c24", "--sp", "62", "--sh", "78", "--node-budget", "1000"]);
    assert_eq!(code(&out), 4);
    let v = json(&out);
    assert_eq!(v["rows"][0]["partial"], true);
    assert!(v["rows"][0]["count"].as_u64().unwrap() < 14592);
    assert_eq!(manifest(dir.path())["partial"], true);
}

#[test]
fn sorted_enumeration_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let base = ["enumerate", "--builtin", "c24", "--sp", "58", "--sh", "102"];
    let mut outputs = Vec::new();
    for workers in ["1", "3", "3"] {
        let out = run_in(dir.path(), &[&base[..], &["--sorted", "--workers", workers]].concat());
        assert_eq!(code(&out), 0);
        outputs.push(out.stdout);
    }
    assert!(outputs.iter().all(|o| *o == outputs[0]));
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 936);

    // The unsorted stream holds the same lines.
    let out = run_in(dir.path(), &[&base[..], &["--workers", "3", "--out", "stream.txt"]].concat());
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["count"], 936);
    let mut lines: Vec<String> =
        fs::read_to_string(dir.path().join("stream.txt")).unwrap().lines().map(String::from).collect();
    let key = |l: &String| -> Vec<u8> { l.split(',').map(|x| x.parse().unwrap()).collect() };
    lines.sort_by_key(key);
    let sorted: Vec<String> = text.lines().map(String::from).collect();
    assert_eq!(lines, sorted);

    let out = run_in(dir.path(), &[&base[..], &["--format", "json"]].concat());
    let v = json(&out);
    assert_eq!(v["solutions"].as_array().unwrap().len(), 936);
    assert_eq!(v["solutions"][0].as_array().unwrap().len(), 24);
}

#[test]
fn orbits_from_file_match_inline() {
    let dir = TempDir::new().unwrap();
    let pair = ["--builtin", "c24", "--sp", "57", "--sh", "108"];
    assert_eq!(code(&run_in(dir.path(), &[&["enumerate"][..], &pair, &["--out", "s.txt"]].concat())), 0);
    let from_file = run_in(dir.path(), &[&["orbits"][..], &pair, &["--solutions", "s.txt"]].concat());
    let inline = run_in(dir.path(), &[&["orbits"][..], &pair, &["--store-solutions"]].concat());
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, inline.stdout);
    let v = json(&inline);
    assert_eq!(
        (v["solutions"].as_u64(), v["orbit_count"].as_u64(), v["group_order"].as_u64()),
        (Some(576), Some(24), Some(24))
    );
    assert_eq!(v["free_action"], true);

    fs::write(dir.path().join("bad.txt"), "1,2,3\n").unwrap();
    let out = run_in(dir.path(), &[&["orbits"][..], &pair, &["--solutions", "bad.txt"]].concat());
    assert_eq!(code(&out), 2);
}

#[test]
fn aut_reports_group_order() {
    let dir = TempDir::new().unwrap();
    for (name, order) in [("c20", 120), ("c24", 24), ("c26", 12)] {
        let v = json(&run_in(dir.path(), &["aut", "--builtin", name]));
        assert_eq!(v["order"], order, "{name}");
        assert!(!v["generators"].as_array().unwrap().is_empty());
    }
}

#[test]
fn pca_writes_projection_and_spectrum() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &["pca", "--builtin", "c24", "--sp", "57", "--sh", "108", "--store-solutions", "--out", "pca/p57"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("pca/p57.csv")).unwrap();
    let spectrum: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pca/p57.spectrum.json")).unwrap()).unwrap();
    assert_eq!(json(&out), spectrum);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y");
    assert_eq!(lines.len(), 577);
    for field in lines[1..].iter().flat_map(|l| l.split(',')) {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        let significant = mantissa.trim_start_matches(['0', '.']).chars().filter(|c| c.is_ascii_digit()).count();
        assert!(significant <= 12, "{field}");
    }

    let g = builtin("C24").unwrap();
    let s = enumerate(&g, MagicPair::new(57, 108), &SearchOptions::store().sorted(true)).unwrap();
    let p = pca(&SolutionMatrix::from_solutions(&s).unwrap(), 2).unwrap();
    let lambda = spectrum["eigenvalues"][0].as_f64().unwrap();
    assert!((lambda - p.eigenvalues[0]).abs() < 1e-9 * p.eigenvalues[0]);
    let m = manifest(&dir.path().join("pca"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn report_embeds_pairwise_counts() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["report", "--builtin", "c24"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["group_order"], 24);
    assert_eq!(v["all_divisible_by_12"], true);
    assert_eq!(v["complements_equal"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows {
        let (sp, sh) = (r["sp"].to_string(), r["sh"].to_string());
        let single = json(&run_in(dir.path(), &["count", "--builtin", "c24", "--sp", &sp, "--sh", &sh]));
        assert_eq!(single["rows"][0]["count"], r["count"], "({sp},{sh})");
    }
}
