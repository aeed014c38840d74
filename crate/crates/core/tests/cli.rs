//! End-to-end runs of the command-line interface against temporary output directories.

use std::path::Path;

use clap::Parser;
use slowmani::cli::{exit_code, run, Cli, Report};

fn cli(out: &Path, args: &[&str]) -> Cli {
    let mut argv = vec!["slowmani", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    Cli::try_parse_from(argv).unwrap()
}

fn run_in(out: &Path, args: &[&str]) -> Report {
    run(&cli(out, args)).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let c = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[c].parse().unwrap()).collect()
}

#[test]
fn all_subcommands_parse() {
    for sub in ["reduce", "simulate", "ssa", "compare", "oracle"] {
        assert!(Cli::try_parse_from(["slowmani", sub, "--builtin", "michaelis_menten"]).is_ok(), "{sub}");
    }
    assert!(Cli::try_parse_from(["slowmani", "reduce", "--bogus"]).is_err());
}

#[test]
fn michaelis_menten_reduce_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(dir.path(), &["reduce", "--builtin", "michaelis_menten", "--at", "1.0"]);
    assert!(report.passed, "{:?}", report.checks);
    let (header, rows) = read_csv(&dir.path().join("reduction.csv"));
    assert_eq!(rows.len(), 1);
    let p11 = column(&header, &rows, "P_1_1")[0];
    assert!((p11 - 0.8).abs() < 1e-8);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn configuration_errors_map_to_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let cases: Vec<Vec<&str>> = vec![
        vec!["reduce", "--builtin", "no_such_model"],
        vec!["reduce", "--config", missing.to_str().unwrap()],
        vec!["reduce"],
        vec!["reduce", "--builtin", "michaelis_menten", "--param", "gamma=2"],
        vec!["--tol=-1", "reduce", "--builtin", "michaelis_menten", "--at", "1"],
        vec!["compare", "--builtin", "michaelis_menten", "--component", "5", "--t-end", "1", "--replicates", "2"],
    ];
    for args in cases {
        let err = run(&cli(dir.path(), &args)).unwrap_err();
        assert!(err.is_config(), "{args:?}: {err}");
        assert_eq!(exit_code(&err), 2);
    }
}

#[test]
fn reruns_write_identical_tables() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["--seed", "7", "simulate", "--builtin", "michaelis_menten", "--t-end", "20", "--replicates", "20"],
        &["--seed", "7", "ssa", "--builtin", "stochastic_logistic", "--t-end", "2", "--replicates", "10"],
        &["--seed", "7", "compare", "--builtin", "michaelis_menten", "--t-end", "20", "--replicates", "20"],
    ];
    for args in runs {
        let ra = run_in(a.path(), args);
        let rb = run_in(b.path(), args);
        assert_eq!(ra.files, rb.files);
        for f in ra.files.iter().filter(|f| f.ends_with(".csv")) {
            let fa = std::fs::read(a.path().join(f)).unwrap();
            let fb = std::fs::read(b.path().join(f)).unwrap();
            assert!(fa == fb, "{f} differs between reruns of {args:?}");
        }
    }
}

#[test]
fn linear_config_has_zero_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("linear.toml");
    std::fs::write(
        &config,
        r#"
dim = 2
noise_dim = 1
epsilon = 0.1
mu = 0.1
f = ["0", "-x2"]
h = ["-x1", "0"]
G = [["1"], ["1"]]

[manifold]
kind = "general"
slow_dim = 1
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let report = run_in(&out, &["reduce", "--config", config.to_str().unwrap(), "--at", "0.5,0"]);
    assert!(report.passed, "{:?}", report.checks);
    let (header, rows) = read_csv(&out.join("reduction.csv"));
    for name in header.iter().filter(|h| h.starts_with("Q_")) {
        assert!(column(&header, &rows, name).iter().all(|&q| q.abs() < 1e-12), "{name}");
    }
}

#[test]
fn noiseless_compare_gives_identical_curves() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        &["compare", "--builtin", "michaelis_menten", "--epsilon", "0", "--mu", "0", "--t-end", "5", "--replicates", "3"],
    );
    assert!(report.passed, "{:?}", report.checks);
    let (header, rows) = read_csv(&dir.path().join("comparison.csv"));
    let full = column(&header, &rows, "mean_full");
    let reduced = column(&header, &rows, "mean_reduced");
    for (a, b) in full.iter().zip(&reduced) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
    assert!(column(&header, &rows, "var_full").iter().all(|&v| v == 0.0));
}

#[test]
fn oracle_agrees_with_the_general_route() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(dir.path(), &["oracle", "--builtin", "michaelis_menten", "--at", "0.5", "--at", "2"]);
    assert!(report.passed, "{:?}", report.checks);
    let (_, rows) = read_csv(&dir.path().join("oracle.csv"));
    assert_eq!(rows.len(), 2);
}
