use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hermite_lp::experiment::{
    emit_plot_data, exit, load_config, run, ExperimentKind, PlotKind, PlotOptions, RunOptions,
};

#[derive(Parser)]
#[command(name = "hermite-lp", version, about = "Hermite eigenfunction experiments and local L^p bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for manifest.json, measurements.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the tolerance scale in the config.
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Hermite orthonormality and eigen-equation residuals.
    Eval(Common),
    /// Mehler contour quadrature against the spectral sum and model.
    KernelCompare(Common),
    /// Stationary phase remainder rates.
    SphaseCheck(Common),
    /// Phase factorization, curvature and mixed Hessian identities.
    PhaseIdentities(Common),
    /// Bound seams, exponent checks and maximal bound tables.
    BoundsTable(Common),
    /// Build eigenfunctions concentrated on tubes.
    Construct(Common),
    /// Saturation ratios and the random upper-bound check.
    Saturate(Common),
    /// Write plot-ready CSV from a finished run.
    EmitPlot {
        /// A directory written by a previous run with --out.
        #[arg(long)]
        run: PathBuf,
        /// hermite-profile, rho-sigma, lambda-vs-r or lambda-vs-mu.
        #[arg(long)]
        kind: PlotKind,
        /// Hermite order for hermite-profile.
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1e4)]
        lambda: f64,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(dispatch(cli.command) as u8)
}

fn dispatch(cmd: Command) -> i32 {
    let (kind, common) = match cmd {
        Command::Eval(c) => (ExperimentKind::Eval, c),
        Command::KernelCompare(c) => (ExperimentKind::KernelCompare, c),
        Command::SphaseCheck(c) => (ExperimentKind::SphaseCheck, c),
        Command::PhaseIdentities(c) => (ExperimentKind::PhaseIdentities, c),
        Command::BoundsTable(c) => (ExperimentKind::BoundsTable, c),
        Command::Construct(c) => (ExperimentKind::Construct, c),
        Command::Saturate(c) => (ExperimentKind::Saturate, c),
        Command::EmitPlot { run, kind, k, n, lambda, output } => {
            let opts = PlotOptions { k, n, lambda, ..PlotOptions::default() };
            let table = match emit_plot_data(&run, kind, &opts) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit::INVALID_CONFIG;
                }
            };
            let bytes = match table.to_csv() {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit::COMPUTATIONAL_FAILURE;
                }
            };
            let written = match output {
                Some(p) => std::fs::write(p, bytes),
                None => std::io::Write::write_all(&mut std::io::stdout(), &bytes),
            };
            return match written {
                Ok(()) => exit::PASS,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit::COMPUTATIONAL_FAILURE
                }
            };
        }
    };
    let cfg = match load_config(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return exit::INVALID_CONFIG;
        }
    };
    if cfg.experiment != kind {
        eprintln!("error: config is for experiment \"{}\" but the subcommand is \"{kind}\"", cfg.experiment);
        return exit::INVALID_CONFIG;
    }
    if let Some(s) = common.tolerance_scale {
        if !(s > 0.0 && s.is_finite()) {
            eprintln!("error: --tolerance-scale must be positive, got {s}");
            return exit::INVALID_CONFIG;
        }
    }
    let opts = RunOptions { out: common.out, threads: common.threads, seed: common.seed, tolerance_scale: common.tolerance_scale };
    match run(&cfg, &opts) {
        Ok(o) => {
            for a in &o.summary.assertions {
                println!("{} {}: {:e} ({})", if a.passed { "PASS" } else { "FAIL" }, a.name, a.measured, a.threshold);
            }
            for e in &o.summary.computational_errors {
                eprintln!("error: {e}");
            }
            println!("{kind}: {:?} in {:.2}s", o.summary.status, o.seconds);
            o.status().exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::COMPUTATIONAL_FAILURE
        }
    }
}
