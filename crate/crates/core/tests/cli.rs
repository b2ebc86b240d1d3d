//! Exit codes and artifacts of the command line binary.

use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_hermite-lp");

fn config(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn status(args: &[&str]) -> i32 {
    Command::new(BIN).args(args).output().expect("spawn").status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn passing_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let code = status(&["bounds-table", "--config", &config("criterion5_bounds.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    for f in ["manifest.json", "measurements.csv", "summary.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "pass");
    assert_eq!(summary["experiment"], "bounds-table");
}

#[test]
fn tightened_tolerance_is_an_assertion_failure() {
    assert_eq!(status(&["bounds-table", "--config", &config("criterion5_bounds.toml"), "--tolerance-scale", "1e-9"]), 1);
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "unknown.toml", "experiment = \"eval\"\n[eval]\nbogus = 1\n");
    assert_eq!(status(&["eval", "--config", &unknown]), 2);
    let missing = dir.path().join("absent.toml");
    assert_eq!(status(&["eval", "--config", missing.to_str().unwrap()]), 2);
    // config for one experiment handed to another subcommand
    assert_eq!(status(&["eval", "--config", &config("criterion5_bounds.toml")]), 2);
    assert_eq!(status(&["bounds-table", "--config", &config("criterion5_bounds.toml"), "--tolerance-scale", "-1"]), 2);
}

#[test]
fn infeasible_construction_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad_tube.toml",
        "experiment = \"construct\"\n[construct]\n[[construct.tubes]]\nn = 2\nbig_n = 100\nj = 0\ndelta = 5.0\n",
    );
    assert_eq!(status(&["construct", "--config", &cfg]), 3);
}

#[test]
fn plot_data_needs_a_finished_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(status(&["emit-plot", "--run", dir.path().to_str().unwrap(), "--kind", "rho-sigma"]), 2);
    let run = dir.path().join("run");
    assert_eq!(status(&["bounds-table", "--config", &config("criterion5_bounds.toml"), "--out", run.to_str().unwrap()]), 0);
    for kind in ["hermite-profile", "rho-sigma", "lambda-vs-r", "lambda-vs-mu"] {
        let csv = dir.path().join(format!("{kind}.csv"));
        let code = status(&["emit-plot", "--run", run.to_str().unwrap(), "--kind", kind, "--output", csv.to_str().unwrap()]);
        assert_eq!(code, 0, "{kind}");
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.lines().count() > 10, "{kind}");
    }
}
