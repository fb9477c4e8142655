use std::path::Path;
use std::process::{Command, Output};

use ccbeam::cli::{CONVERGE_HEADER, SWEEP_HEADER};

const SMALL: &[&str] = &["--realizations", "40", "--set", "ga.iterations=20"];

fn ccbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccbeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = ccbeam(args);
    assert!(
        out.status.success(),
        "ccbeam {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn sweep_to(path: &Path, extra: &[&str]) {
    let p = path.to_str().unwrap();
    let mut args = vec!["sweep", "--out", p];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    run_ok(&args);
}

/// Splits a CSV into (preamble, header, rows).
fn split(text: &str) -> (Vec<&str>, &str, Vec<Vec<&str>>) {
    let mut lines = text.lines();
    let preamble: Vec<&str> = lines.by_ref().take(3).collect();
    let header = lines.next().expect("header line");
    let rows = lines.map(|l| l.split(',').collect()).collect();
    (preamble, header, rows)
}

#[test]
fn sweep_csv_has_preamble_header_and_parseable_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    sweep_to(&path, &["--powers-db", "0:10:20", "--seed", "9"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let (preamble, header, rows) = split(&text);

    assert!(preamble[0].starts_with("# ccbeam ") && preamble[0].ends_with(" sweep"));
    assert!(preamble[1].starts_with("# seed=9 config_sha256="));
    let hash = preamble[1].rsplit('=').next().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    let json = preamble[2].strip_prefix("# config=").unwrap();
    let config: ccbeam::orchestrator::SimConfig = serde_json::from_str(json).unwrap();
    assert_eq!(config.master_seed, 9);
    assert_eq!(config.realizations, 40);

    assert_eq!(header, SWEEP_HEADER);
    // 3 powers x (2 coded schemes x 4 methods + 2 uncoded schemes)
    assert_eq!(rows.len(), 30);
    for r in &rows {
        assert_eq!(r.len(), 8, "{r:?}");
        let power: f64 = r[0].parse().unwrap();
        assert!([0.0, 10.0, 20.0].contains(&power));
        let coded = r[1].starts_with("Coded");
        assert_eq!(coded, !r[2].is_empty(), "{r:?}");
        if coded {
            let beta: f64 = r[3].parse().unwrap();
            assert!((0.0..=1.0).contains(&beta));
        } else {
            assert!(r[3].is_empty());
        }
        let stp: f64 = r[4].parse().unwrap();
        let thr: f64 = r[5].parse().unwrap();
        assert!((0.0..=1.0).contains(&stp));
        assert!(thr.is_finite() && thr >= 0.0);
        assert_eq!(r[6], "40");
        assert_eq!(r[7], "9");
    }
}

#[test]
fn sweep_rerun_is_byte_identical_and_seed_matters() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    sweep_to(&a, &["--powers-db", "10"]);
    sweep_to(&b, &["--powers-db", "10"]);
    sweep_to(&c, &["--powers-db", "10", "--seed", "2"]);
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    assert_ne!(a, std::fs::read(c).unwrap());
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"realizations": 7, "schemes": ["UncodedBf"], "powers_db": [5]}"#).unwrap();
    let out = dir.path().join("o.csv");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--realizations",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out).unwrap();
    let (_, _, rows) = split(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "UncodedBf");
    assert_eq!(rows[0][6], "12");
}

#[test]
fn converge_writes_full_monotone_traces() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    run_ok(&["converge", "--examples", "3", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let (preamble, header, rows) = split(&text);
    assert!(preamble[0].ends_with(" converge"));
    assert_eq!(header, CONVERGE_HEADER);
    assert_eq!(rows.len(), 3 * 150);
    for (id, trace) in rows.chunks(150).enumerate() {
        let mut last = f64::NEG_INFINITY;
        for (k, r) in trace.iter().enumerate() {
            assert_eq!(r[0].parse::<usize>().unwrap(), id);
            assert_eq!(r[1].parse::<usize>().unwrap(), k + 1);
            let v: f64 = r[2].parse().unwrap();
            assert!(v.is_finite() && v >= last, "trace {id} drops at {k}");
            last = v;
        }
    }
}

#[test]
fn converge_rejects_several_powers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let out = ccbeam(&["converge", "--powers-db", "0:10:20", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!path.exists());
}

#[test]
fn bad_configuration_exits_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.csv");
    let out = out_path.to_str().unwrap();
    for args in [
        vec!["sweep", "--set", "beta_grid_step=1.5", "--out", out],
        vec!["sweep", "--set", "no_such_key=1", "--out", out],
        vec!["sweep", "--set", "ga.population_size=3", "--out", out],
        vec!["sweep", "--set", "realizations", "--out", out],
        vec!["sweep", "--powers-db", "0:0:10", "--out", out],
        vec!["sweep", "--no-such-flag"],
    ] {
        let o = ccbeam(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert!(!out_path.exists());
}

#[test]
fn malformed_config_file_exits_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ \"antennas\": \"many\" }").unwrap();
    let o = ccbeam(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "unused.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("antennas"));
}

#[test]
fn io_failures_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("missing").join("x.csv");
    let mut args = vec!["sweep", "--powers-db", "0", "--out", unwritable.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    assert_eq!(ccbeam(&args).status.code(), Some(2));

    let missing_cfg = dir.path().join("nope.json");
    let o = ccbeam(&["sweep", "--config", missing_cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
