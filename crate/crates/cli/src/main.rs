//! `cloning-optics`: run named experiments and the acceptance suite from the command line.
//!
//! Exit codes: 0 when every row or criterion passes, 1 on usage or config errors
//! (reported as JSON on stderr), 2 when a row or criterion fails.

mod config;
mod experiments;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use cloning_optics::acceptance::{verify_all, VerifyOptions};
use serde_json::json;

use config::{check_m_cap, check_tolerance, ConfigFile, Experiment, ExperimentConfig, Format, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Simulation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Simulation(_) => "simulation",
            CliError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cloning-optics", version, about = "Linear-optical cloning experiments and checks")]
struct Cli {
    /// JSON experiment config (`"schema": 1`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Parameter override: a number, a JSON list, a JSON grid or `start:stop:step`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the table or report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Replaces every pinned tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Run the acceptance suite instead of an experiment.
    #[arg(long, conflicts_with_all = ["config", "experiment", "set", "format"])]
    verify: bool,
    /// Largest clone number the circuits may simulate.
    #[arg(long)]
    m_cap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verify(cli: &Cli) -> Result<bool, CliError> {
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        tolerance: check_tolerance(cli.tolerance)?,
        m_cap: check_m_cap(cli.m_cap.unwrap_or(defaults.m_cap))?,
        seed: cli.seed.unwrap_or(defaults.seed),
    };
    let reports = verify_all(&opts);
    let mut out = sink(cli.output.as_ref())?;
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    for r in &reports {
        if r.pass() {
            writeln!(out, "{}", r.summary_line()).map_err(io_err)?;
        } else {
            write!(out, "{r}").map_err(io_err)?;
        }
    }
    let passed = reports.iter().filter(|r| r.pass()).count();
    writeln!(out, "{passed}/{} criteria passed", reports.len()).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(passed == reports.len())
}

fn experiment(cli: &Cli) -> Result<bool, CliError> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let flags = Overrides {
        experiment: cli.experiment,
        set: cli.set.clone(),
        output: cli.output.clone(),
        format: cli.format,
        tolerance: cli.tolerance,
        m_cap: cli.m_cap,
        seed: cli.seed,
    };
    let cfg = ExperimentConfig::resolve(file, &flags)?;
    let rows = experiments::run_experiment(&cfg)?;
    let mut out = sink(cfg.output.as_ref())?;
    output::write_table(&cfg, &rows, &mut out)?;
    out.flush().map_err(|e| CliError::Io(e.to_string()))?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{}: {failed} of {} rows outside tolerance", cfg.experiment, rows.len());
    }
    Ok(failed == 0)
}

fn report(err: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": err.kind(), "message": err.to_string() } }));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Usage(e.render().to_string().trim().to_string())),
    };
    let outcome = if cli.verify { verify(&cli) } else { experiment(&cli) };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => report(&e),
    }
}
