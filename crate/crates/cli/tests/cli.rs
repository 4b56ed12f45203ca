//! End-to-end tests driving the compiled binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn quiver_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quiver"))
}

fn run(args: &[&str]) -> Output {
    quiver_bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("quiver-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn check_ribbon_classical_vs_quiver_bound() {
    let out = run(&[
        "check",
        "--family",
        "ribbon",
        "--m",
        "3",
        "--checks",
        "brouwer",
        "--classical-bound",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1), "classical bound must fail");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let report = &doc["reports"][0];
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["first_violation"], 1);
    assert_eq!(report["margin"], -2.0);
    assert!(report["quiver"].as_str().unwrap().starts_with("2 3"));

    let out = run(&[
        "check", "--family", "ribbon", "--m", "3", "--checks", "brouwer", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["reports"][0]["verdict"], "pass");
    assert_eq!(doc["reports"][0]["sharp"], true);
}

#[test]
fn certificate_cycle16_emits_full_json() {
    let out = run(&[
        "check",
        "--family",
        "cycle",
        "--n",
        "16",
        "--checks",
        "certificate",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let cert = &doc["certificate"];
    assert_eq!(cert["n"], 16);
    assert_eq!(cert["case_boundary"], 4);
    assert_eq!(cert["tree_edges"].as_array().unwrap().len(), 15);
    assert_eq!(cert["steps"].as_array().unwrap().len(), 1);

    // below the n >= 4 d_1^2 threshold: inapplicable, still exit 0
    let out = run(&[
        "check", "--family", "cycle", "--n", "15", "--checks", "certificate", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["reports"][0]["verdict"], "inapplicable");
    assert!(doc["certificate"].is_null());
}

#[test]
fn spectra_csv_k7_fixture() {
    let out = run(&[
        "spectra",
        "--family",
        "k7_ribbon_fixture",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,S,D,B,H,U2D,A");
    let row6: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("6,"))
        .unwrap()
        .split(',')
        .collect();
    let s6: f64 = row6[1].parse().unwrap();
    assert!((s6 - 122.0).abs() <= 1e-8);
    assert_eq!(row6[3], "122");
    assert!(text.contains("# n=7 m=61 r=40"));
}

#[test]
fn qvr_file_round_trip() {
    let path = tmp_path("input.qvr");
    std::fs::write(&path, "# two loops and an edge\n3 3\n0 1\n1 1\n1 1\n").unwrap();
    let out = run(&[
        "spectra",
        "--input",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["summary"]["n"], 3);
    assert_eq!(doc["summary"]["m"], 3);
    std::fs::remove_file(&path).ok();
}

#[test]
fn parse_error_exits_2() {
    let path = tmp_path("bad.qvr");
    std::fs::write(&path, "3 2\n0 1\n").unwrap();
    let out = run(&["spectra", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();

    let out = run(&["check", "--family", "moebius", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));

    // random family without a seed is a usage error
    let out = run(&["check", "--family", "random_quiver", "--n", "5", "--m", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_is_byte_reproducible() {
    let args = [
        "search",
        "--family",
        "random_quiver",
        "--n",
        "10",
        "--m",
        "12",
        "--loops",
        "3",
        "--multi",
        "2",
        "--seed",
        "424242",
        "--trials",
        "40",
        "--checks",
        "sandwich,lew,interlacing,hadamard",
        "--s3-stat",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "same seed must replay byte-identically");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["failures"], 0);
    assert_eq!(doc["instances"], 40);
    assert!(doc["s3_excess"]["max_excess"].as_f64().unwrap().is_finite());
}

#[test]
fn search_batch_file() {
    let path = tmp_path("batch.json");
    std::fs::write(
        &path,
        r#"{
            "family": "enumerate",
            "params": {"n": 4},
            "seed": 1,
            "trials": 0,
            "checks": ["brouwer", "signless", "connection"]
        }"#,
    )
    .unwrap();
    let out = run(&[
        "search",
        "--batch",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["instances"], 64);
    assert_eq!(doc["failures"], 0);
    // the experimental Green-radius statistic rides along with connection;
    // rho(g) = rho(L) exactly on K2-like graphs, so allow float noise
    assert!(doc["green_radius_excess"].as_f64().unwrap() <= 1e-9);
    std::fs::remove_file(&path).ok();
}

#[test]
fn check_all_on_path_graph() {
    let out = run(&[
        "check", "--family", "path", "--n", "6", "--checks", "all", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 15);
    for r in reports {
        assert_ne!(r["verdict"], "fail", "{}", r["check"]);
    }
}

#[test]
fn human_spectra_marks_tightest_bound() {
    let out = run(&["spectra", "--family", "complete", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("tightest"));
    assert!(text.lines().count() >= 7);
}

#[test]
fn output_file_is_written() {
    let path = tmp_path("out.csv");
    let out = run(&[
        "spectra",
        "--family",
        "ribbon",
        "--m",
        "2",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,S,D,B,H,U2D,A\n1,4,2,4,4,4,4\n"));
    std::fs::remove_file(&path).ok();
}
