use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use cekit_core::bounds::surface::HminSurface;
use cekit_core::finitekey::KeyRateReport;
use cekit_core::protocol::{Estimates, Transcript};

fn cekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cekit")).args(args).output().unwrap()
}

fn cekit_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cekit"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn header(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().next().unwrap_or_default().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn csv_headers() {
    let b = cekit(&["bounds", "--deps-grid", "0:1:0.5", "--starts", "4"]);
    assert_eq!(header(&b), "d_eps,family,pwin,c00,c01,nx,method");
    assert_eq!(String::from_utf8_lossy(&b.stdout).lines().count(), 1 + 3 * 3);
    let e = cekit(&["entropy", "--deps-grid", "0:1:0.5", "--starts", "4"]);
    assert_eq!(header(&e), "d_eps,entropy");
    let r = cekit(&["randomness", "--deps-values", "0", "--points", "3", "--starts", "4"]);
    assert_eq!(header(&r), "d_eps,pwin_target,p_guess,h_min");
    let s = cekit(&["simulate", "--m", "10"]);
    assert_eq!(header(&s), "i,x,y,alpha,beta,a,b");
    assert_eq!(String::from_utf8_lossy(&s.stdout).lines().count(), 11);
    let k = cekit(&["keyrate", "--pwin", "0.6", "--deps", "0", "--D", "1000", "--format", "csv", "--starts", "4"]);
    assert_eq!(header(&k), "m,gamma,eta,d_eps,pwin,kappa,ell,key_length,budget");
}

#[test]
fn separable_rows_leave_parameters_empty() {
    let b = cekit(&["bounds", "--deps-grid", "0.5:0.5:0.1", "--families", "separable", "--starts", "4"]);
    let text = String::from_utf8(b.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("0.5,separable,0.853553390593,,,,"), "{row}");
}

#[test]
fn json_outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.json");
    let sim = cekit(&[
        "simulate",
        "--m",
        "2000",
        "--format",
        "json",
        "--seed",
        "5",
        "--estimates-out",
        est.to_str().unwrap(),
    ]);
    assert!(sim.status.success() || sim.status.code() == Some(1), "{}", stderr(&sim));
    let t: Transcript = serde_json::from_slice(&sim.stdout).unwrap();
    assert_eq!(t.rounds.len(), 2000);
    let e: Estimates = serde_json::from_str(&fs::read_to_string(&est).unwrap()).unwrap();
    assert_eq!(e.m, 2000);
    assert_eq!(e.d_size, t.detection.len());

    let surf = dir.path().join("surface.json");
    let k = cekit(&[
        "keyrate",
        "--pwin",
        "0.62",
        "--deps",
        "0",
        "--D",
        "200000",
        "--starts",
        "4",
        "--surface-points",
        "5",
        "--surface-out",
        surf.to_str().unwrap(),
    ]);
    let report: KeyRateReport = serde_json::from_slice(&k.stdout).unwrap();
    assert_eq!(report.d_size, 200_000);
    assert_eq!(report.m, 800_000);
    assert_eq!(k.status.code(), Some(if report.feasible { 0 } else { 1 }));
    let s: HminSurface = serde_json::from_str(&fs::read_to_string(&surf).unwrap()).unwrap();

    // Reusing the written surface reproduces the report exactly.
    let again = cekit(&[
        "keyrate",
        "--pwin",
        "0.62",
        "--deps",
        "0",
        "--D",
        "200000",
        "--starts",
        "4",
        "--surface",
        surf.to_str().unwrap(),
    ]);
    assert_eq!(String::from_utf8_lossy(&again.stdout), String::from_utf8_lossy(&k.stdout));
    assert!(!s.nodes().is_empty());
}

#[test]
fn transcript_pipeline_through_stdin() {
    let sim = cekit(&["simulate", "--m", "40000", "--seed", "2"]);
    assert!(sim.status.success());
    let k = cekit_stdin(&["keyrate", "--seed", "2", "--starts", "4", "--surface-points", "5"], &sim.stdout);
    let report: KeyRateReport = serde_json::from_slice(&k.stdout).unwrap();
    assert_eq!(report.m, 40_000);
    assert!((report.pwin_hat - 0.625).abs() < 0.01, "{}", report.pwin_hat);
    assert_eq!(report.deps_hat, 0.0);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# bounds run\ndeps-grid = 0:1:0.5\nfamilies = mixed\nstarts = 4\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = cekit(&["bounds", "--config", c]);
    assert_eq!(String::from_utf8_lossy(&from_file.stdout).lines().count(), 4);
    let overridden = cekit(&["bounds", "--config", c, "--deps-grid", "0:1:1"]);
    let text = String::from_utf8(overridden.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",mixed,")));

    fs::write(&cfg, "tune = true\npwin = 0.6\ndeps = 0\nD = 1000\nstarts = 4\nsurface-points = 5\n").unwrap();
    let k = cekit(&["keyrate", "--config", c]);
    assert!(k.status.code().unwrap() <= 1, "{}", stderr(&k));
    fs::write(&cfg, "tune = maybe\n").unwrap();
    assert_eq!(cekit(&["keyrate", "--config", c]).status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "deps-grid = 0:1:0.5\nstrats = 4\n").unwrap();
    let out = cekit(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("strats"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bounds", "--deps-grid", "0:1"][..],
        &["bounds", "--deps-grid", "0:2:0.5"],
        &["bounds", "--families", "quantum"],
        &["simulate", "--deps", "1.5"],
        &["simulate", "--m", "10", "--gamma", "0"],
        &["keyrate", "--pwin", "0.6"],
        &["keyrate", "--pwin", "0.6", "--deps", "0", "--D", "100", "--mu", "2"],
        &["keyrate", "--pwin", "0.6", "--deps", "0", "--D", "100", "--eta", "0.5"],
        &["randomness", "--deps-values", "0,0.1", "--surface-out", "/dev/null"],
        &["audit", "--resolution", "0"],
        &["frobnicate"],
    ] {
        let out = cekit(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn malformed_transcripts_are_rejected() {
    let bad_header = cekit_stdin(&["keyrate"], b"i,x,y\n0,1,1\n");
    assert_eq!(bad_header.status.code(), Some(1));
    assert!(stderr(&bad_header).contains("header"));
    let bad_bit = cekit_stdin(&["keyrate"], b"i,x,y,alpha,beta,a,b\n0,1,2,1,1,0,0\n");
    assert_eq!(bad_bit.status.code(), Some(1));
    assert!(stderr(&bad_bit).contains("0 or 1"));
}

#[test]
fn noisy_devices_abort() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.json");
    let out = cekit(&[
        "simulate",
        "--m",
        "20000",
        "--visibility",
        "0.5",
        "--eta",
        "0.01",
        "--seed",
        "1",
        "--out",
        "-",
        "--estimates-out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let e: Estimates = serde_json::from_str(&fs::read_to_string(&est).unwrap()).unwrap();
    assert!(e.aborted && e.eta_b > 0.01, "{e:?}");

    let k = cekit_stdin(&["keyrate", "--seed", "1", "--eta", "0.01"], &out.stdout);
    assert_eq!(k.status.code(), Some(1));
    assert!(stderr(&k).contains("aborted"));
    assert!(k.stdout.is_empty());
}
