use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = r#"{"type":"graph_cut","n":3,"edges":[[0,1,1.0],[1,2,1.0],[0,2,1.0]]}"#;

fn symsub() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symsub"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    symsub().args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["metadata"]["wall_time_ms"].is_number());
    doc["report"].clone()
}

#[test]
fn mcg_on_triangle_meets_its_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "tri.json", TRIANGLE);
    let r = report(&run(&[
        "--instance",
        inst.to_str().unwrap(),
        "--algorithm",
        "mcg",
        "--k",
        "1",
        "--seed",
        "7",
    ]));
    assert_eq!(r["opt"], 2.0);
    assert!(r["ratio"].as_f64().unwrap() >= 0.432);
    assert!((r["theoretical_ratio"].as_f64().unwrap() - 0.5 * (1.0 - (-2.0f64).exp())).abs() < 1e-12);
    assert_eq!(r["solution"].as_array().unwrap().len(), 1);
}

#[test]
fn report_block_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "tri.json", TRIANGLE);
    let args = [
        "--instance",
        inst.to_str().unwrap(),
        "--algorithm",
        "dmcg-symmetric",
        "--k",
        "1",
        "--samples",
        "500",
        "--seed",
        "11",
    ];
    let a = report(&run(&args));
    let b = report(&run(&args));
    assert_eq!(a, b);
    assert_eq!(a["estimator"], "sampled");
}

#[test]
fn welfare_random_on_tight_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "tight.json", r#"{"type":"welfare_tight","k":3}"#);
    let r = report(&run(&[
        "--instance",
        inst.to_str().unwrap(),
        "--algorithm",
        "welfare-random",
    ]));
    let ratio = r["ratio"].as_f64().unwrap();
    let sigma = r["value_std_err"].as_f64().unwrap() / 3.0;
    assert!(
        (ratio - 5.0 / 9.0).abs() <= 4.0 * sigma + 1e-9,
        "{ratio} vs 5/9, sigma {sigma}"
    );
    assert_eq!(r["samples"], 100_000);
}

#[test]
fn two_sided_is_half_optimal_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "h.json",
        r#"{"type":"hypergraph_cut","n":5,"hyperedges":[[[0,1,2],2.0],[[2,3],1.0],[[1,3,4],1.5]]}"#,
    );
    let out_file = dir.path().join("r.csv");
    let out = run(&[
        "--instance",
        inst.to_str().unwrap(),
        "--algorithm",
        "two-sided",
        "--format",
        "csv",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut rd = csv::Reader::from_path(&out_file).unwrap();
    let header = rd.headers().unwrap().clone();
    let row = rd.records().next().unwrap().unwrap();
    let col = |name: &str| row[header.iter().position(|h| h == name).unwrap()].to_owned();
    let value: f64 = col("value").parse().unwrap();
    let opt: f64 = col("opt").parse().unwrap();
    assert!(value >= 0.5 * opt - 1e-9);
    assert_eq!(col("theoretical_ratio"), "0.5");
}

#[test]
fn constrained_instance_and_brute_polytope() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "c.json",
        r#"{"type":"constrained","objective":{"type":"graph_cut","n":4,"edges":[[0,1,1],[1,2,1],[2,3,1]]},
            "polytope":{"type":"partition","parts":[[0,1],[2,3]],"bounds":[1,1]}}"#,
    );
    let path = inst.to_str().unwrap();
    let brute = report(&run(&["--instance", path, "--algorithm", "brute-polytope"]));
    assert_eq!(brute["value"], 3.0);
    let mcg = report(&run(&["--instance", path, "--algorithm", "mcg"]));
    assert_eq!(mcg["opt"], 3.0);
    assert!(mcg["solution"].as_array().unwrap().len() <= 2);
}

#[test]
fn hardness_instance_cardinality_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "h.json", r#"{"type":"hardness","p":1,"q":2}"#);
    let r = report(&run(&[
        "--instance",
        inst.to_str().unwrap(),
        "--algorithm",
        "brute-cardinality",
        "--k",
        "2",
    ]));
    assert_eq!(r["value"], 1.0);
}

#[test]
fn parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    let unknown = write(
        dir.path(),
        "u.json",
        r#"{"type":"graph_cut","n":2,"edges":[],"colour":1}"#,
    );
    for p in [bad, unknown, dir.path().join("missing.json")] {
        let out = run(&["--instance", p.to_str().unwrap(), "--algorithm", "two-sided"]);
        assert_eq!(out.status.code(), Some(1), "{}", p.display());
    }
}

#[test]
fn inconsistent_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "tri.json", TRIANGLE);
    let p = inst.to_str().unwrap();
    let not_symmetric = write(
        dir.path(),
        "cov.json",
        r#"{"type":"coverage","n":2,"weights":[1.0,2.0],"membership":[[0],[0,1]]}"#,
    );
    let cases: Vec<Vec<&str>> = vec![
        vec!["--instance", p, "--algorithm", "two-sided", "--k", "1"],
        vec!["--instance", p, "--algorithm", "two-sided", "--T", "0.5"],
        vec!["--instance", p, "--algorithm", "mcg"],
        vec!["--instance", p, "--algorithm", "dmcg-symmetric", "--k", "4"],
        vec!["--instance", p, "--algorithm", "unknown"],
        vec!["--instance", p],
        vec!["--self-check", "--instance", p],
        vec![
            "--instance",
            not_symmetric.to_str().unwrap(),
            "--algorithm",
            "dmcg-symmetric",
            "--k",
            "1",
        ],
        vec!["sweep", "--ratios", "1.5"],
    ];
    for args in cases {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn oracle_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let edges: Vec<String> = (0..23).map(|u| format!("[{u},{},1.0]", (u + 1) % 24)).collect();
    let inst = write(
        dir.path(),
        "big.json",
        &format!(r#"{{"type":"graph_cut","n":24,"edges":[{}]}}"#, edges.join(",")),
    );
    let p = inst.to_str().unwrap();
    assert_eq!(
        run(&["--instance", p, "--algorithm", "brute-unconstrained"])
            .status
            .code(),
        Some(3)
    );
    let out = run(&["--instance", p, "--algorithm", "two-sided", "--require-oracle"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&run(&["--instance", p, "--algorithm", "two-sided"]));
    assert!(r["opt"].is_null());
}

#[test]
fn empty_sweep_writes_only_header() {
    let out = run(&["sweep"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("family,n,k,k_over_n,seed,"));
}

#[test]
fn sweep_rows_carry_the_curve() {
    let out = run(&[
        "sweep", "--n", "6", "--ratios", "0.5", "--seeds", "2", "--steps", "400", "--seed", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(&r[2], "3");
        let curve: f64 = r[9].parse().unwrap();
        assert!((curve - 0.5 * (1.0 - 0.5f64.powi(4))).abs() < 1e-12);
        let ratio: f64 = r[8].parse().unwrap();
        let margin: f64 = r[10].parse().unwrap();
        assert!((ratio - curve - margin).abs() < 1e-12);
    }
}

#[test]
fn self_check_runs_at_reduced_size() {
    let out = run(&["--self-check", "--samples", "4000", "--seed", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut rd = csv::Reader::from_reader(out.stdout.as_slice());
    let statuses: Vec<String> = rd.records().map(|r| r.unwrap()[1].to_owned()).collect();
    assert!(statuses.len() > 20);
    assert!(statuses.iter().all(|s| s != "fail"));
}
