//! Command-line front end.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stafshape::run::{format_map, run_optimize, RunConfig, RunReport, RunResult};
use stafshape::scenarios::{scene_map, SceneId};
use stafshape::selfcheck::{self_check, SelfCheckOptions};

#[derive(Parser)]
#[command(name = "stafshape", version, about = "Slow-time ambiguity function shaping for unimodular radar codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a code as described by a JSON run configuration.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the finite-difference and identity checks on a small problem.
    Selfcheck {
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// Write a reference scene as `r,h,weight` CSV.
    Scene {
        #[arg(long, value_enum)]
        id: SceneArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        nv: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<SceneArg> for SceneId {
    fn from(a: SceneArg) -> Self {
        match a {
            SceneArg::One => SceneId::Scene1,
            SceneArg::Two => SceneId::Scene2,
        }
    }
}

fn print_report(r: &RunReport, dir: &std::path::Path) {
    println!(
        "{} [{}] SIR {:.3} dB -> {:.3} dB, mean suppressed STAF {:.3} dB -> {:.3} dB, {} outer / {} inner iterations ({})",
        r.algorithm,
        r.init,
        r.initial_sir_db,
        r.final_sir_db,
        r.initial_mean_suppressed_staf_db,
        r.final_mean_suppressed_staf_db,
        r.outer_iters,
        r.total_inner_iters,
        r.stop
    );
    if let Some(c) = &r.comparison {
        println!(
            "  comparison: adpm_rtr {:.3} dB, rtr_only {:.3} dB",
            c.adpm_rtr_sir_db, c.rtr_only_sir_db
        );
    }
    println!("  artifacts in {}", dir.display());
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Optimize { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            match run_optimize(&cfg, out.as_deref())? {
                RunResult::Single(outcome) => print_report(&outcome.report, &outcome.output_dir),
                RunResult::Batch { runs, summary } => {
                    for o in &runs {
                        print_report(&o.report, &o.output_dir);
                    }
                    println!(
                        "batch of {}: final SIR {:.3} ± {:.3} dB",
                        summary.seeds.len(),
                        summary.final_sir_db.mean,
                        summary.final_sir_db.stddev
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selfcheck { corrupt_gradient } => {
            let report = self_check(SelfCheckOptions { corrupt_gradient })?;
            for c in &report.checks {
                println!(
                    "{} {}: error {:.3e} (tolerance {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.error,
                    c.tolerance
                );
            }
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                let names: Vec<&str> = report.failures().map(|c| c.name).collect();
                eprintln!("selfcheck failed: {}", names.join(", "));
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Scene { id, out, k, nv } => {
            let map = scene_map(id.into(), k, nv)?;
            fs::write(&out, format_map(&map)).map_err(|e| format!("{}: {e}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
