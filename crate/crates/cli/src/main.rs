use std::path::PathBuf;
use std::process::ExitCode;

use chainbound_cli::{run, CliError, ExperimentConfig};
use clap::Parser;

/// Runs one chainbound experiment described by a TOML or JSON config.
///
/// Exit status: 0 when every asserted contract passed, 3 when one failed,
/// 2 for usage and config errors, 1 otherwise.
#[derive(Debug, Parser)]
#[command(name = "chainbound", version)]
struct Args {
    /// Experiment config (TOML or JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replicate loops (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: the config `output`, else `./out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match go(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn go(args: &Args) -> Result<u8, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let (manifest, outcome) = run(&cfg, &out, args.workers)?;
    let mut failed = false;
    for c in outcome.failures() {
        failed = true;
        let row = c.row.map_or_else(|| "-".to_string(), |r| r.to_string());
        eprintln!("contract {} failed (table {}.csv, row {row}): {}", c.name, manifest.command, c.detail);
    }
    println!(
        "{}: {} contracts passed, {} failed; outputs in {}",
        manifest.command,
        manifest.contracts_passed,
        manifest.contracts_failed,
        out.display()
    );
    Ok(if failed { 3 } else { 0 })
}
