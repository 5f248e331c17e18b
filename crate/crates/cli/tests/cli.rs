use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quic_core::io::{read_dataset, read_matrix, read_trace_csv, write_matrix_dense};
use quic_core::{
    cholesky, f_value, random_precision, sample_covariance, sample_gaussian, Problem, SymMatrix,
};
use tempfile::TempDir;

fn quic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn objective_of(dir: &Path, cov: &Path, lambda: f64) -> f64 {
    let s = read_matrix(&fs::read_to_string(cov).unwrap()).unwrap();
    let x = read_matrix(&fs::read_to_string(dir.join("solution.txt")).unwrap()).unwrap();
    let prob = Problem::off_diagonal(s, lambda).unwrap();
    f_value(&prob, &x, &cholesky(&x).unwrap())
}

#[test]
fn chain_precision_file_has_expected_nonzeros() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("g");
    let o = quic(&[
        "generate",
        "--kind",
        "chain",
        "--p",
        "4",
        "--n",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prec = read_matrix(&fs::read_to_string(out.join("precision.txt")).unwrap()).unwrap();
    assert_eq!(prec.as_slice().iter().filter(|v| **v != 0.0).count(), 10);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn random_files_match_in_memory_generation() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("g");
    let o = quic(&[
        "generate",
        "--kind",
        "random",
        "--p",
        "50",
        "--nnz",
        "500",
        "--n",
        "80",
        "--seed",
        "9",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let truth = random_precision(50, 500, 9).unwrap();
    let data = sample_gaussian(&truth, 80, 10).unwrap();
    let cov = sample_covariance(&data).unwrap();
    let read = |name: &str| fs::read_to_string(out.join(name)).unwrap();
    assert_eq!(
        read_matrix(&read("precision.txt")).unwrap(),
        truth.precision
    );
    assert_eq!(read_dataset(&read("data.txt")).unwrap(), data);
    assert_eq!(read_matrix(&read("cov.txt")).unwrap(), cov);
}

#[test]
fn generation_is_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = quic(&[
            "generate",
            "--kind",
            "random",
            "--p",
            "20",
            "--seed",
            "3",
            "--out",
            path_str(dir),
        ]);
        assert!(o.status.success());
    }
    for name in ["precision.txt", "data.txt", "cov.txt"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn identity_covariance_solves_to_identity() {
    let tmp = TempDir::new().unwrap();
    let cov = tmp.path().join("cov.txt");
    fs::write(&cov, write_matrix_dense(&SymMatrix::identity(5))).unwrap();
    let out = tmp.path().join("s");
    let o = quic(&[
        "solve",
        path_str(&cov),
        "--lambda",
        "0.4",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let x = read_matrix(&fs::read_to_string(out.join("solution.txt")).unwrap()).unwrap();
    assert_eq!(x, SymMatrix::identity(5));
    let trace = read_trace_csv(&fs::read_to_string(out.join("trace.csv")).unwrap()).unwrap();
    assert!(trace.len() <= 2);
}

#[test]
fn both_solvers_agree_on_chain() {
    let tmp = TempDir::new().unwrap();
    let g = tmp.path().join("g");
    assert!(quic(&[
        "generate",
        "--kind",
        "chain",
        "--p",
        "100",
        "--seed",
        "4",
        "--out",
        path_str(&g)
    ])
    .status
    .success());
    let cov = g.join("cov.txt");
    let (qd, rd) = (tmp.path().join("q"), tmp.path().join("r"));
    let oq = quic(&[
        "solve",
        path_str(&cov),
        "--lambda",
        "0.4",
        "--tol",
        "1e-7",
        "--out",
        path_str(&qd),
    ]);
    let or = quic(&[
        "solve",
        path_str(&cov),
        "--lambda",
        "0.4",
        "--solver",
        "reference",
        "--tol",
        "1e-7",
        "--max-outer",
        "1000000",
        "--out",
        path_str(&rd),
    ]);
    assert_eq!(
        oq.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&oq.stderr)
    );
    assert_eq!(
        or.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&or.stderr)
    );
    let fq = objective_of(&qd, &cov, 0.4);
    let fr = objective_of(&rd, &cov, 0.4);
    assert!(((fq - fr) / fr).abs() <= 1e-6, "{fq} vs {fr}");

    let trace = read_trace_csv(&fs::read_to_string(qd.join("trace.csv")).unwrap()).unwrap();
    let rows = fs::read_to_string(qd.join("trace.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    assert_eq!(rows, trace.len());
    assert!(trace.rows.windows(2).all(|w| w[1].f < w[0].f));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(qd.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["config"]["solver"], "quic");
    assert!(manifest["prng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let missing = tmp.path().join("missing.txt");
    assert_eq!(
        quic(&[
            "solve",
            path_str(&missing),
            "--lambda",
            "0.4",
            "--out",
            path_str(&out)
        ])
        .status
        .code(),
        Some(1)
    );

    let bad = tmp.path().join("bad.txt");
    fs::write(&bad, "p 2\ndense\n1 0\n0 x\n").unwrap();
    let o = quic(&[
        "solve",
        path_str(&bad),
        "--lambda",
        "0.4",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    assert_eq!(quic(&["solve", "--no-such-flag"]).status.code(), Some(4));

    let g = tmp.path().join("g");
    assert!(quic(&[
        "generate",
        "--kind",
        "chain",
        "--p",
        "30",
        "--out",
        path_str(&g)
    ])
    .status
    .success());
    let o = quic(&[
        "solve",
        path_str(&g.join("cov.txt")),
        "--lambda",
        "0.1",
        "--max-outer",
        "1",
        "--tol",
        "1e-9",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("solution.txt").exists());
}

#[test]
fn bench_table_shape_and_budget_marker() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("b");
    let o = quic(&[
        "bench",
        "--kind",
        "chain",
        "--p",
        "100",
        "--lambda",
        "0.4",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "dataset,p,lambda,eps,quic,reference");
    assert!(lines[1].starts_with("chain,100,0.4,1e-2,"));
    assert!(lines[2].starts_with("chain,100,0.4,1e-6,"));
    let cells: Vec<f64> = lines[2]
        .split(',')
        .skip(4)
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(
        cells[0] < cells[1],
        "quic should beat the reference to 1e-6: {cells:?}"
    );
    assert!(out.join("recovery.csv").exists());

    // A zero budget leaves the reference no time at all.
    let out = tmp.path().join("b0");
    let o = quic(&[
        "bench",
        "--kind",
        "chain",
        "--p",
        "30",
        "--lambda",
        "0.4",
        "--solver",
        "reference",
        "--eps",
        "1e-6",
        "--budget",
        "0",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let table = fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(table.lines().nth(1).unwrap(), "chain,30,0.4,1e-6,*");
}
