use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use morrey_lab::cli::{self, Command};

/// Weighted Morrey space laboratory.
#[derive(Parser)]
#[command(name = "morrey-lab", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides MORREY_LAB_REPORT_DIR and the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match cli::run(args.command, &args.config, args.output_dir.as_deref()) {
        Ok(outcome) => {
            for check in outcome.report.failed_checks() {
                eprintln!("check failed: {} (measured {}, reference {})", check.name, check.measured, check.reference);
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            println!("{}: {}", outcome.report.experiment, if outcome.report.passed { "pass" } else { "FAIL" });
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
