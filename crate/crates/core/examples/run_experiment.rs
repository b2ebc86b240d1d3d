//! Running a shipped experiment config through the library and reading back
//! its assertions.

use std::path::PathBuf;

use hermite_lp::experiment::{load_config, run, RunOptions};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/criterion5_bounds.toml")
    });
    let cfg = match load_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            std::process::exit(2);
        }
    };
    let o = run(&cfg, &RunOptions { seed: Some(cfg.seed), ..Default::default() }).expect("run");
    for a in &o.summary.assertions {
        println!("{} {} = {:e} ({})", if a.passed { "PASS" } else { "FAIL" }, a.name, a.measured, a.threshold);
    }
    println!("{} rows, status {:?}, {:.2}s", o.table.rows.len(), o.summary.status, o.seconds);
}
