//! Acceptance suite: runs the shipped configs and prints one PASS/FAIL line
//! per criterion. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;

use hermite_lp::experiment::{load_config, run, Assertion, RunOptions, RunOutcome, RunStatus};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn execute(name: &str, out: Option<PathBuf>, threads: Option<usize>) -> RunOutcome {
    let cfg = load_config(&config_path(name)).unwrap_or_else(|e| panic!("{e}"));
    run(&cfg, &RunOptions { out, threads, ..Default::default() }).expect("run")
}

struct Line {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn judge(id: &'static str, o: &RunOutcome, budget_s: f64, pick: impl Fn(&Assertion) -> bool) -> Line {
    let selected: Vec<&Assertion> = o.summary.assertions.iter().filter(|a| pick(a)).collect();
    let failed: Vec<&str> = selected.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
    let errors = &o.summary.computational_errors;
    let in_time = o.seconds <= budget_s;
    let passed = !selected.is_empty() && failed.is_empty() && errors.is_empty() && in_time;
    let mut detail = format!("{} assertions, {:.2}s (budget {budget_s}s)", selected.len(), o.seconds);
    if !failed.is_empty() {
        detail += &format!("; failed: {}", failed.join(" | "));
    }
    if !errors.is_empty() {
        detail += &format!("; errors: {}", errors.join(" | "));
    }
    Line { id, passed, detail }
}

fn all(_: &Assertion) -> bool {
    true
}

fn main() -> ExitCode {
    let mut lines = Vec::new();

    let o = execute("criterion1_eval.toml", None, None);
    lines.push(judge("1 hermite foundation", &o, 60.0, all));

    let o = execute("criterion2_kernel.toml", None, None);
    lines.push(judge("2 kernel cross-validation", &o, 300.0, |a| a.name.starts_with("kernel")));

    let o = execute("criterion3_phase.toml", None, None);
    lines.push(judge("3 phase identities", &o, 120.0, all));

    let o = execute("criterion4_sphase.toml", None, None);
    lines.push(judge("4 stationary phase", &o, 120.0, all));

    let o = execute("criterion5_bounds.toml", None, None);
    lines.push(judge("5 bound formula integrity", &o, 10.0, all));

    let sat = execute("criterion6_7_saturate.toml", None, None);
    lines.push(judge("6 sharpness sweep", &sat, 1800.0, |a| a.name.starts_with("case")));
    let mut seven = judge("7 upper-bound direction", &sat, 1800.0, |a| a.name.starts_with("largest ratio"));
    if let Some(c) = sat.summary.derived.get("c_upper") {
        seven.detail += &format!("; C_upper = {c}");
    }
    lines.push(seven);

    let o = execute("criterion8_kernel_bound.toml", None, None);
    lines.push(judge("8 kernel size bound", &o, 600.0, all));

    // byte-identical CSV bodies from two runs, with different thread counts
    let dir = tempfile::tempdir().expect("tempdir");
    let mut mismatched = Vec::new();
    let mut checked = 0;
    let mut entries: Vec<_> = std::fs::read_dir(config_path(""))
        .expect("configs directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    entries.sort();
    for path in entries {
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let body = |tag: &str, threads| {
            let out = dir.path().join(format!("{name}-{tag}"));
            let o = execute(&name, Some(out.clone()), Some(threads));
            (o.status(), std::fs::read(out.join("measurements.csv")).expect("csv written"))
        };
        let (s1, a) = body("a", 1);
        let (s2, b) = body("b", 2);
        checked += 1;
        if a != b || s1 != s2 || s1 == RunStatus::ComputationalFailure {
            mismatched.push(name);
        }
    }
    lines.push(Line {
        id: "9 determinism",
        passed: mismatched.is_empty() && checked > 0,
        detail: if mismatched.is_empty() {
            format!("{checked} configs, identical CSV bodies")
        } else {
            format!("differing: {}", mismatched.join(", "))
        },
    });

    let mut ok = true;
    for l in &lines {
        ok &= l.passed;
        println!("{} criterion {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.detail);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
