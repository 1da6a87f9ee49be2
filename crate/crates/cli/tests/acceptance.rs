//! Acceptance battery: one PASS/FAIL line per criterion; exits non-zero if
//! any fails. Runs without the test harness so the lines always show.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cekit::audit;
use cekit_core::bounds::SeesawConfig;

const BIN: &str = env!("CARGO_BIN_EXE_cekit");

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn run(args: &[&str], stdin: Option<&Path>, threads: Option<&str>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("CEKIT_THREADS", n);
    }
    if let Some(p) = stdin {
        cmd.stdin(fs::File::open(p).unwrap());
    }
    let out = cmd.output().expect("spawn cekit");
    let code = out.status.code().unwrap_or(-1);
    if !(0..=1).contains(&code) {
        eprintln!("cekit {args:?} exited {code}:\n{}", String::from_utf8_lossy(&out.stderr));
    }
    (code, out.stdout)
}

fn csv_rows(bytes: &[u8]) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| header.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn num(row: &BTreeMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap_or_else(|_| panic!("column {k}: `{}`", row[k]))
}

fn timed<T>(limit: Duration, f: impl FnOnce() -> (bool, String, T)) -> (bool, String) {
    let t = Instant::now();
    let (ok, detail, _) = f();
    let el = t.elapsed();
    (ok && el <= limit, format!("{detail} [{:.1}s / limit {}s]", el.as_secs_f64(), limit.as_secs()))
}

fn seesaw() -> SeesawConfig {
    SeesawConfig::default()
}

fn perfect_resource() -> (bool, String) {
    timed(Duration::from_secs(1), || {
        let c = audit::perfect_resource().unwrap();
        (c.passed, c.detail, ())
    })
}

fn objective_algebra() -> (bool, String) {
    timed(Duration::from_secs(10), || {
        let c = audit::objective_algebra(1000, 0).unwrap();
        (c.passed, c.detail, ())
    })
}

/// Non-decreasing up to round-off in the last emitted digit.
const MONO_TOL: f64 = 1e-9;

fn hierarchy() -> (bool, String) {
    timed(Duration::from_secs(300), || {
        let (code, out) = run(&["bounds", "--deps-grid", "0:1:0.02", "--starts", "32"], None, None);
        let rows = csv_rows(&out);
        let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for r in &rows {
            curves.entry(r["family"].clone()).or_default().push((num(r, "d_eps"), num(r, "pwin")));
        }
        let (ent, sep, mix) = (&curves["entangled"], &curves["separable"], &curves["mixed"]);
        let mut problems = Vec::new();
        if code != 0 || ent.len() != 51 || sep.len() != 51 || mix.len() != 51 {
            problems.push(format!("exit {code}, {} rows", rows.len()));
        }
        let mut min_gap = f64::INFINITY;
        for k in 0..ent.len().min(sep.len()).min(mix.len()) {
            let d = ent[k].0;
            let (e, s, m) = (ent[k].1, sep[k].1, mix[k].1);
            if e < s - MONO_TOL || s < m - MONO_TOL {
                problems.push(format!("order broken at d={d}"));
            }
            if (0.05 - 1e-12..=0.95 + 1e-12).contains(&d) {
                min_gap = min_gap.min(e - s).min(s - m);
            }
        }
        if min_gap <= 0.0 {
            problems.push(format!("non-strict gap {min_gap:.3e} inside [0.05, 0.95]"));
        }
        for (name, c) in &curves {
            if c.windows(2).any(|w| w[1].1 < w[0].1 - MONO_TOL) {
                problems.push(format!("{name} not monotone"));
            }
            let last = c.last().unwrap();
            if (last.0 - 1.0).abs() > 1e-12 || (last.1 - 1.0).abs() > 1e-6 {
                problems.push(format!("{name} = {} at d=1", last.1));
            }
        }
        let detail = format!("51 d_eps x 3 families, min gap on [0.05,0.95] = {min_gap:.3e}; {}", summary(&problems));
        (problems.is_empty(), detail, ())
    })
}

fn summary(problems: &[String]) -> String {
    if problems.is_empty() {
        "no violations".into()
    } else {
        problems.join("; ")
    }
}

fn oracle() -> (bool, String) {
    timed(Duration::from_secs(600), || {
        let (c, rows) = audit::oracle_agreement(&audit::ORACLE_D_VALUES, 0.01, &seesaw()).unwrap();
        (c.passed && rows.len() == 6, c.detail, ())
    })
}

fn entropy() -> (bool, String) {
    timed(Duration::from_secs(300), || {
        let (code, out) = run(&["entropy", "--deps-grid", "0:1:0.02"], None, None);
        let rows = csv_rows(&out);
        let s: Vec<f64> = rows.iter().map(|r| num(r, "entropy")).collect();
        let mut problems = Vec::new();
        if code != 0 || s.len() != 51 {
            problems.push(format!("exit {code}, {} rows", s.len()));
        }
        let (first, last) = (s[0], s[s.len() - 1]);
        if (first - 1.0).abs() > 1e-6 {
            problems.push(format!("S(0) = {first}"));
        }
        if last.abs() > 1e-6 {
            problems.push(format!("S(1) = {last}"));
        }
        if s.windows(2).any(|w| w[1] > w[0] + MONO_TOL) {
            problems.push("not monotone".into());
        }
        (problems.is_empty(), format!("S(0) = {first:.9}, S(1) = {last:.3e}; {}", summary(&problems)), ())
    })
}

fn randomness() -> (bool, String) {
    timed(Duration::from_secs(900), || {
        let (code, out) = run(&["randomness", "--deps-values", "0,0.01,0.05,0.1,0.2,0.5"], None, None);
        let rows = csv_rows(&out);
        let mut by_d: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
        for r in &rows {
            by_d.entry(r["d_eps"].clone()).or_default().push((
                num(r, "pwin_target"),
                num(r, "p_guess"),
                num(r, "h_min"),
            ));
        }
        let mut problems = Vec::new();
        if code != 0 || by_d.len() != 6 {
            problems.push(format!("exit {code}, {} curves", by_d.len()));
        }
        let mut zero_checked = 0;
        let mut top_h = Vec::new();
        for (d, curve) in &by_d {
            let sep = (1.0 + d.parse::<f64>().unwrap().sqrt()) / 2.0;
            for &(p, _, h) in curve {
                if p <= sep + 1e-12 {
                    zero_checked += 1;
                    if h.abs() > 1e-6 {
                        problems.push(format!("d={d}: h_min = {h} at {p} <= separable {sep}"));
                    }
                }
            }
            let &(_, _, h_top) = curve.last().unwrap();
            top_h.push(h_top);
            if h_top <= 1e-3 {
                problems.push(format!("d={d}: h_min = {h_top} at the optimum"));
            }
            if curve.windows(2).any(|w| w[1].1 > w[0].1 + MONO_TOL) {
                problems.push(format!("d={d}: p_guess not monotone"));
            }
        }
        let lowest = top_h.iter().cloned().fold(f64::INFINITY, f64::min);
        let detail = format!(
            "6 curves, {zero_checked} targets at/below the separable bound, min h_min at optimum = {lowest:.4}; {}",
            summary(&problems)
        );
        (problems.is_empty(), detail, ())
    })
}

fn stationarity() -> (bool, String) {
    timed(Duration::from_secs(60), || {
        let sweep: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
        let (c, mismatches) = audit::stationarity_system(&sweep, &seesaw()).unwrap();
        let logged = mismatches.iter().all(|m| (m.analytic - m.seesaw).abs() > 1e-6);
        (c.passed && logged, c.detail, ())
    })
}

fn formulas_and_concentration() -> (bool, String) {
    timed(Duration::from_secs(120), || {
        let (f, _) = audit::formulas(5, 0);
        let (c, lines) = audit::concentration(10_000, 1_000, &seesaw(), 0).unwrap();
        let ok = f.passed && c.passed && !lines.is_empty();
        (ok, format!("{}; {}", f.detail, c.detail), ())
    })
}

fn positive_key() -> (bool, String) {
    timed(Duration::from_secs(120), || {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("transcript.csv");
        let (c0, _) = run(
            &[
                "simulate",
                "--m",
                "1000000",
                "--deps",
                "0",
                "--gamma",
                "0.05",
                "--seed",
                "7",
                "--out",
                t.to_str().unwrap(),
            ],
            None,
            None,
        );
        let key = ["keyrate", "--gamma", "0.05", "--eta", "0.01", "--mu", "1e-6", "--seed", "7"];
        // Exit 1 marks an infeasible budget; the report is still written.
        let (c1, out) = run(&key, Some(&t), None);
        let rep: serde_json::Value = serde_json::from_slice(&out).unwrap();
        let k = rep["key_length"].as_u64().unwrap();
        let dt = rep["deps_tilde"].as_f64().unwrap();
        let below = ((1.0 + dt.sqrt()) / 2.0 - 1e-3).to_string();
        let mut forced = key.to_vec();
        forced.extend(["--pwin-tilde", &below]);
        let (c2, out2) = run(&forced, Some(&t), None);
        let rep2: serde_json::Value = serde_json::from_slice(&out2).unwrap();
        let k2 = rep2["key_length"].as_u64().unwrap();
        let ok = c0 == 0 && c1 <= 1 && c2 <= 1 && k > 0 && k2 == 0;
        let detail = format!(
            "key_length = {k} (kappa {:.4}, feasible {}); forced P~ = {below:.6} gives key_length = {k2}",
            rep["kappa"].as_f64().unwrap(),
            rep["feasible"]
        );
        (ok, detail, ())
    })
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let transcript = p("t.csv");
    let (c, _) = run(&["simulate", "--m", "20000", "--seed", "11", "--out", &transcript], None, None);
    assert_eq!(c, 0);
    let cases: Vec<(&str, Vec<String>, Vec<&str>)> = vec![
        ("bounds", vec![], vec!["bounds", "--deps-grid", "0:1:0.1", "--starts", "8", "--seed", "3"]),
        ("entropy", vec![], vec!["entropy", "--deps-grid", "0:1:0.25", "--starts", "8", "--seed", "3"]),
        (
            "randomness",
            vec!["surface.json".into()],
            vec!["randomness", "--deps-values", "0,0.05,0.1,0.15,0.2", "--points", "5", "--seed", "3"],
        ),
        (
            "simulate",
            vec!["est.json".into()],
            vec!["simulate", "--m", "5000", "--deps", "0.1", "--visibility", "0.95", "--seed", "3"],
        ),
        (
            "keyrate",
            vec!["ksurf.json".into()],
            vec!["keyrate", "--transcript", &transcript, "--seed", "3", "--surface-points", "5"],
        ),
        (
            "keyrate-raw",
            vec![],
            vec!["keyrate", "--pwin", "0.62", "--deps", "0.01", "--D", "200000", "--tune", "--seed", "3"],
        ),
        ("audit", vec![], vec!["audit", "--resolution", "0.1", "--runs", "200", "--rounds", "200", "--seed", "3"]),
    ];
    let mut problems = Vec::new();
    for (name, extras, args) in &cases {
        let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
        for (k, threads) in ["1", "3"].iter().enumerate() {
            let out = p(&format!("{name}-{k}.out"));
            let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            a.extend(["--out".into(), out.clone()]);
            let extra_paths: Vec<String> = extras.iter().map(|e| p(&format!("{k}-{e}"))).collect();
            for e in &extra_paths {
                let flag = if name.starts_with("simulate") { "--estimates-out" } else { "--surface-out" };
                a.extend([flag.into(), e.clone()]);
            }
            let refs: Vec<&str> = a.iter().map(String::as_str).collect();
            let (code, _) = run(&refs, None, Some(threads));
            if code == 2 || code < 0 {
                problems.push(format!("{name} exited {code}"));
            }
            let mut files = vec![fs::read(&out).unwrap_or_default()];
            files.extend(extra_paths.iter().map(|e| fs::read(e).unwrap_or_default()));
            outputs.push(files);
        }
        if outputs[0] != outputs[1] || outputs[0].iter().any(Vec::is_empty) {
            problems.push(format!("{name} differs"));
        }
    }
    (
        problems.is_empty(),
        format!("{} subcommand runs repeated on 1 and 3 threads; {}", cases.len(), summary(&problems)),
    )
}

type Criterion = fn() -> (bool, String);

fn main() {
    let criteria: [(&'static str, Criterion); 10] = [
        ("perfect resource", perfect_resource),
        ("objective algebra", objective_algebra),
        ("resource hierarchy", hierarchy),
        ("oracle equivalence", oracle),
        ("entanglement entropy endpoints", entropy),
        ("randomness threshold", randomness),
        ("stationarity audit", stationarity),
        ("formula audit and concentration", formulas_and_concentration),
        ("positive key region", positive_key),
        ("determinism", determinism),
    ];
    let mut lines = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let (passed, detail) = f();
        let line = Line { id: i + 1, name, passed, detail };
        println!("{} [{}] {}: {}", if line.passed { "PASS" } else { "FAIL" }, line.id, line.name, line.detail);
        lines.push(line);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", lines.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
