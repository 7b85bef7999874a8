use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hkqk::cli_verify::{error_exit_code, exit_code, run_suite, write_report, RunConfig, Suite};
use hkqk::Result;

/// Samples admissible points and checks the quaternionic Kaehler output of
/// the hyper-Kaehler/quaternionic Kaehler correspondence.
#[derive(Parser, Debug)]
#[command(name = "verify", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Restrict to these suites (base, qk, curvature, fs, derivatives).
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    if !args.suites.is_empty() {
        cfg.suites = args.suites.iter().map(|s| Suite::parse(s)).collect::<Result<_>>()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().or_else(|| cfg.output.clone());
    let report = run_suite(&cfg)?;
    for line in report.lines() {
        eprintln!("{line}");
    }
    eprintln!(
        "{}/{} checks passed ({})",
        report.summary.passed, report.summary.checks, report.fixture
    );
    match out {
        Some(path) => write_report(&report, &path)?,
        None => print!("{}", report.to_json()),
    }
    Ok(exit_code(&report))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
