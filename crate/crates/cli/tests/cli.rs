use std::fs;
use std::path::Path;
use std::process::Command;

use maxreg_core::NormSpec64;
use maxreg_lab::config::ConfigError;
use maxreg_lab::{execute, CorpusSelection, Experiment, ExperimentConfig};

fn maxreg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxreg"))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.cfg");
    fs::write(
        &path,
        "# small sweep\n\
         experiment = theorem1-sweep\n\
         grid_h = 1/16\n\
         norms = linf; rect:2,1\n\
         radius_caps = 0.5\n\
         corpus = square, mine\n\
         profile.mine = radial norm=l2 shape=exp rate=2\n\
         tol.refine = 0.1\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::from_file(&path, None).unwrap();
    assert_eq!(cfg.experiment, Experiment::Theorem1Sweep);
    assert_eq!(cfg.grid_h, 1.0 / 16.0);
    assert_eq!(cfg.norms, vec![NormSpec64::Linf, NormSpec64::Rectangle { weights: vec![2.0, 1.0] }]);
    assert_eq!(cfg.radius_caps, vec![0.5]);
    assert_eq!(cfg.corpus, CorpusSelection::Ids(vec!["square".into(), "mine".into()]));
    assert!(cfg.profiles.contains_key("mine"));
    assert_eq!(cfg.tol.refine, 0.1);
}

#[test]
fn config_errors_name_the_line() {
    let err = ExperimentConfig::parse("experiment = bench\ngrid_h = zero\n", None).unwrap_err();
    match err {
        ConfigError::Syntax { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other:?}"),
    }
    assert!(ExperimentConfig::parse("grid_h = 1/8\n", None).is_err());
    assert!(ExperimentConfig::parse("experiment = nonsense\n", None).is_err());
}

#[test]
fn execute_writes_summary_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(Experiment::SquareDemo);
    cfg.grid_h = 1.0 / 64.0;
    cfg.out = dir.path().to_path_buf();
    let (outcome, paths) = execute(&cfg).unwrap();
    assert!(outcome.passed());
    let exp_dir = dir.path().join("square-demo");
    for name in ["summary.json", "square.csv", "timings.csv"] {
        assert!(paths.contains(&exp_dir.join(name)), "{name} missing from {paths:?}");
    }
    let json: serde_json::Value = serde_json::from_str(&read(&exp_dir, "summary.json")).unwrap();
    assert_eq!(json["experiment"], "square-demo");
    assert!(json["checks"].as_array().is_some_and(|c| !c.is_empty()));
    assert!(read(&exp_dir, "square.csv").starts_with("dim,h,quantity,value,target,rel_err,pass\n"));
}

#[test]
fn binary_reports_checks_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = maxreg().args(["square-demo", "--grid-h", "1/64", "--out"]).arg(dir.path()).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("square-demo/summary.json").exists());
}

#[test]
fn binary_outputs_are_reproducible() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = maxreg()
                .args(["theorem1-sweep", "--grid-h", "1/8", "--norm", "l2", "--radius-cap", "0.5", "--out"])
                .arg(dir.path())
                .output()
                .unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            dir
        })
        .collect();
    for name in ["summary.json", "rows.csv"] {
        let a = read(&runs[0].path().join("theorem1-sweep"), name);
        let b = read(&runs[1].path().join("theorem1-sweep"), name);
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    // A tolerance of zero cannot be met by the discretized square.
    fs::write(&cfg, "tol.square_variation = 0\n").unwrap();
    let out = maxreg()
        .args(["square-demo", "--grid-h", "1/16", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["no-such-experiment"],
        vec!["square-demo", "--grid-h", "-1"],
        vec!["square-demo", "--norm", "lp:0.5"],
    ] {
        let out = maxreg().args(&args).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}
