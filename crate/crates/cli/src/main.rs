use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use hermheat_core::experiments::{format_number, parse_config, run_experiment, Experiment, ExperimentConfig, Report};
use hermheat_core::propagator::mehler_self_check;

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Runs a named experiment and writes its CSV tables and JSON summary.
#[derive(Debug, Parser)]
#[command(name = "hermheat", version)]
struct Args {
    /// propagator-check, smoothing-sweep, continuity, norms-audit, envelope-audit, decay or blowup-probe
    #[arg(value_parser = parse_experiment)]
    experiment: Experiment,

    /// Flat TOML file with the experiment parameters.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides `output` in the config. Defaults to `out`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for the random test fields; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    Experiment::parse(s).ok_or_else(|| format!("unknown experiment `{s}`; expected one of {}", Experiment::ALL.map(|e| e.name()).join(", ")))
}

fn uses_kernel_path(config: &ExperimentConfig) -> bool {
    match config {
        ExperimentConfig::PropagatorCheck(c) => c.beta == 1.0,
        ExperimentConfig::BlowupProbe(_) => true,
        _ => false,
    }
}

fn print_summary(report: &Report) {
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        if c.relation == "flag" {
            println!("{status} {}", c.name);
        } else {
            println!("{status} {} = {} ({} {})", c.name, format_number(c.measured), c.relation, format_number(c.limit));
        }
        if let Some(n) = &c.note {
            println!("     {n}");
        }
    }
}

fn run(args: Args) -> anyhow::Result<ExitCode> {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: invalid config: cannot read {}: {e}", args.config.display());
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let resolved = match parse_config(&text, args.experiment, args.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    if uses_kernel_path(&resolved.experiment) {
        if let Err(e) = mehler_self_check::<f64>() {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_ASSERTION));
        }
    }
    let report = match run_experiment(&resolved.experiment) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} failed: {e}", args.experiment);
            return Ok(ExitCode::from(EXIT_ASSERTION));
        }
    };
    let dir = args.out.or(resolved.output).unwrap_or_else(|| PathBuf::from("out"));
    let written = report.write(&dir).with_context(|| format!("writing reports to {}", dir.display()))?;
    println!("{}", args.experiment);
    if let Some(sigma) = report.results.get("sigma") {
        println!("sigma = {sigma}");
    }
    print_summary(&report);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_ASSERTION) })
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
