use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jost_core::{CoefficientProfile, ComplexMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-jost"))
}

fn profile(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../profiles")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn temp_profile(dir: &tempfile::TempDir, p: &CoefficientProfile) -> PathBuf {
    let path = dir.path().join("profile.json");
    std::fs::write(&path, p.to_json()).unwrap();
    path
}

/// Scalar profile with `N0 = 8` and a mild potential on every site.
fn long_profile() -> CoefficientProfile {
    let s = |x: f64| ComplexMatrix::from_real_diag(&[x]);
    CoefficientProfile::new(
        1,
        vec![s(1.0); 9],
        vec![s(-1.0); 8],
        (0..8).map(|k| s(0.1 * k as f64)).collect(),
        vec![s(0.0); 8],
    )
    .unwrap()
}

#[test]
fn validate_exit_codes() {
    assert_eq!(
        run(&["validate", arg(&profile("free_m2.json"))])
            .status
            .code(),
        Some(0)
    );

    let bad = run(&["validate", arg(&profile("singular_b1.json"))]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["ok"], false);
    assert!(stdout(&bad).contains("SingularB"));

    let missing = run(&["validate", "/nonexistent/profile.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"m\": 1").unwrap();
    assert_eq!(run(&["validate", arg(&garbage)]).status.code(), Some(2));
}

#[test]
fn eigs_reports() {
    let free = run(&["eigs", arg(&profile("free_m2.json"))]);
    assert_eq!(free.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&free.stdout).unwrap();
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), 0);
    assert_eq!(report["band"], serde_json::json!([-2.0, 2.0]));

    let bench = run(&["eigs", arg(&profile("benchmark.json"))]);
    let report: serde_json::Value = serde_json::from_slice(&bench.stdout).unwrap();
    let eigs = report["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 1);
    let lambda = eigs[0]["lambda"].as_f64().unwrap();
    assert!(lambda > 2.0 && lambda < 4.0);

    let csv = stdout(&run(&[
        "eigs",
        arg(&profile("benchmark.json")),
        "--format",
        "csv",
    ]));
    assert_eq!(
        csv.lines().next(),
        Some("t,z_re,z_im,lambda,multiplicity,det_residual")
    );
    assert_eq!(csv.lines().count(), 2);

    assert_eq!(
        run(&["eigs", arg(&profile("singular_b1.json"))])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["eigs", arg(&profile("benchmark.json")), "--margin", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_comparison() {
    let out = run(&["oracle", arg(&profile("benchmark.json")), "--n", "400"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let matches = doc["comparison"]["matches"].as_array().unwrap();
    assert_eq!(matches.len(), 1);
    assert!(matches[0]["gap"].as_f64().unwrap() <= 1e-6);

    let free = run(&[
        "oracle",
        arg(&profile("free_m2.json")),
        "--n",
        "500",
        "--format",
        "csv",
    ]);
    let csv = stdout(&free);
    assert_eq!(csv.lines().next(), Some("N,lambda,in_band"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 500);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));

    let dir = tempfile::tempdir().unwrap();
    let long = temp_profile(&dir, &long_profile());
    let short = run(&["oracle", arg(&long), "--n", "3"]);
    assert_eq!(short.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&short.stderr).contains("too small"));
}

#[test]
fn band_rows() {
    let dir = tempfile::tempdir().unwrap();
    let free1 = temp_profile(&dir, &CoefficientProfile::free(1));

    let small = stdout(&run(&["band", arg(&free1), "--n", "10"]));
    let rows: Vec<f64> = small
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|x| x.abs() < 2.0));

    let large = stdout(&run(&["band", arg(&free1), "--n", "500"]));
    assert_eq!(large.lines().count(), 1001);
    assert!(large.lines().skip(1).all(|l| l.ends_with(",true")));

    let bench = stdout(&run(&[
        "band",
        arg(&profile("benchmark.json")),
        "--n",
        "400",
    ]));
    assert_eq!(bench.lines().filter(|l| l.ends_with(",false")).count(), 1);
}

#[test]
fn verify_contract() {
    let free = run(&["verify", arg(&profile("free_m2.json"))]);
    assert_eq!(free.status.code(), Some(0));
    assert!(stdout(&free).contains("summary: 8/8 checks passed"));

    let corrupt = run(&["verify", arg(&profile("benchmark.json")), "--corrupt"]);
    assert_eq!(corrupt.status.code(), Some(1));
    let text = stdout(&corrupt);
    assert!(text.contains("FAIL recurrence_residual"));
    assert!(text.contains("failed: "));

    assert_eq!(run(&["verify"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic_and_redirectable() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let input = profile("two_site_m2.json");
    let args = ["eigs", arg(&input)];
    let direct = run(&args);
    let redirected = run(&[&args[..], &["--out", arg(&target)]].concat());
    assert_eq!(redirected.status.code(), Some(0));
    assert!(redirected.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), direct.stdout);
    assert_eq!(run(&args).stdout, direct.stdout);

    let v = [
        "verify", "--random", "3", "--seed", "11", "--format", "json",
    ];
    assert_eq!(run(&v).stdout, run(&v).stdout);
}
