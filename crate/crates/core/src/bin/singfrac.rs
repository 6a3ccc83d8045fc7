use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use singular_fractional::cli::commands::{EXIT_CONFIG, EXIT_RUNTIME};
use singular_fractional::cli::{load_config, run_command, Command};
use singular_fractional::Error;

/// Singular fractional Dirichlet problems on intervals and rectangles.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// basis-check | solve-eps | continue | validate-extension |
    /// uniqueness-probe | report
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// Parent of the run directory (default: `output_dir` from the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter { .. } | Error::Unresolved { .. } => {
                    EXIT_CONFIG
                }
                _ => EXIT_RUNTIME,
            }
        }
    };
    ExitCode::from(code as u8)
}

fn run(args: &Args) -> Result<i32, Error> {
    let command: Command = args.command.parse()?;
    let cfg = load_config(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let outcome = run_command(command, &cfg, &out)?;
    let failed: Vec<_> = outcome
        .report
        .certificates
        .iter()
        .filter(|c| !c.passed)
        .collect();
    println!(
        "{}: {} certificates, {} failed -> {}",
        command,
        outcome.report.certificates.len(),
        failed.len(),
        outcome.dir.display()
    );
    if let Some(first) = failed.first() {
        println!("first failure: {} {}", first.name, first.detail);
    }
    Ok(outcome.exit_code())
}
