//! Subcommand dispatch, output-directory resolution and exit codes.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use morrey_core::geometry::Cube;
use morrey_core::norms::MorreyParams;

use crate::config::Config;
use crate::error::Result;
use crate::experiments::{self, ConnectInput};
use crate::report::Report;

/// Environment variable overriding the report directory of the config.
pub const REPORT_DIR_ENV: &str = "MORREY_LAB_REPORT_DIR";

/// Exit status when every computation succeeded but a check failed.
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Norm,
    Maximal,
    ApConstant,
    AxEstimate,
    VerifyEqst,
    VerifyRedw,
    VerifyKp,
    VerifyConnect,
    Scan,
    Lattices,
}

/// Runs one experiment on a parsed config.
pub fn build_report(command: Command, cfg: &Config) -> Result<Report> {
    let mut report = match command {
        Command::Norm => experiments::run_norm(cfg)?,
        Command::Maximal => experiments::run_maximal(cfg)?,
        Command::ApConstant => experiments::run_ap_constant(cfg)?,
        Command::AxEstimate => experiments::run_ax_estimate(cfg)?,
        Command::Lattices => experiments::run_lattices(cfg)?,
        Command::VerifyEqst => {
            let spec = cfg.grid()?;
            let e = cfg.section(&cfg.eqst, "eqst")?;
            let f = cfg.function(&spec)?;
            let w = cfg.weight(&spec)?;
            experiments::verify_eqst(&f, &w, cfg.params()?, &e.omega.build()?, e.r1, e.r2)?
        }
        Command::VerifyRedw => {
            let spec = cfg.grid()?;
            let e = cfg.section(&cfg.redw, "redw")?;
            let q = Cube::new(e.center.clone(), e.side)?;
            let f = cfg.function(&spec)?;
            let w = cfg.weight(&spec)?;
            experiments::verify_redw(&q, e.big_n, &f, &w, cfg.params()?)?
        }
        Command::VerifyKp => {
            let e = cfg.section(&cfg.key_property, "key_property")?;
            experiments::verify_key_property(&e.points.build()?, e.nu, e.samples, cfg.seed)?
        }
        Command::VerifyConnect => {
            let e = cfg.section(&cfg.connect, "connect")?;
            let function = cfg.section(&cfg.function, "function")?.clone();
            experiments::verify_connect(&ConnectInput {
                function,
                weight: cfg.weight.clone(),
                grid: cfg.grid()?,
                params: cfg.params()?,
                points: e.points.build()?,
                nu: e.nu,
                levels: e.levels,
                seed: cfg.seed,
            })?
        }
        Command::Scan => {
            let scan = cfg.scan.clone().unwrap_or_default();
            let params = match &cfg.params {
                Some(_) => cfg.params()?,
                None => MorreyParams::new(2.0, 0.5)?,
            };
            experiments::scan_characterization(&scan, params, cfg.seed)?
        }
    };
    report.seed = cfg.seed;
    Ok(report)
}

/// Report directory: command-line flag, then the environment variable, then
/// the config's `output_dir`, then `reports`.
pub fn resolve_output_dir(flag: Option<&Path>, cfg: &Config) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(REPORT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("reports"))
}

/// Outcome of a CLI run.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Loads the config, runs the experiment and writes its report files.
pub fn run(command: Command, config: &Path, output_dir: Option<&Path>) -> Result<RunOutcome> {
    let cfg = Config::load(config)?;
    let report = build_report(command, &cfg)?;
    let dir = resolve_output_dir(output_dir, &cfg);
    let files = report.write(&dir)?;
    Ok(RunOutcome { report, files })
}
