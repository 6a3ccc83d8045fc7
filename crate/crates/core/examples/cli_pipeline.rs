//! Runs the full report pipeline from a TOML configuration and lists the
//! artifacts it wrote.
//!
//! `cargo run --release --example cli_pipeline -- [config] [out]`

use std::path::PathBuf;

use singular_fractional::cli::{load_config, run_command, Command, RunConfig};
use singular_fractional::geometry::Domain;

fn main() -> singular_fractional::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => load_config(&PathBuf::from(path))?,
        None => RunConfig::new(Domain::interval(std::f64::consts::PI)?),
    };
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("singfrac-{}", std::process::id())));

    let outcome = run_command(Command::Report, &cfg, &out)?;
    for c in &outcome.report.certificates {
        if !c.name.contains("/solve-")
            && !c.name.contains("/sandwich-")
            && !c.name.contains("/ordering-")
        {
            println!("{:<44} {}", c.name, if c.passed { "ok" } else { "FAILED" });
        }
    }
    println!(
        "{} files in {}",
        outcome.manifest.files.len(),
        outcome.dir.display()
    );
    std::process::exit(outcome.exit_code());
}
