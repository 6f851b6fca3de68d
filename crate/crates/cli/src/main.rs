//! `survmix`: effect sizes, sample sizes, calibration, simulation and analysis
//! for responder mixture survival designs.

mod commands;
mod keys;
mod report;

use std::process::ExitCode;

use clap::Command;
use survmix_core::Error;

use keys::Params;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Config(_) => 2,
                Error::InfeasibleInput { .. } | Error::InfeasibleDesign(_) => 3,
                Error::Numeric(_) => 4,
                Error::Parse { .. } | Error::Degenerate(_) | Error::Io(_) | Error::Csv(_) => 5,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn cli() -> Command {
    Command::new("survmix")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Trial design for survival endpoints with a responder mixture")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(keys::subcommand("effectsize", "RMST difference and its decomposition"))
        .subcommand(keys::subcommand("samplesize", "sample size for the RMST-difference test"))
        .subcommand(keys::subcommand("calibrate", "subgroup laws implied by summary inputs"))
        .subcommand(keys::subcommand("simulate", "empirical power or significance level by simulation"))
        .subcommand(keys::subcommand("analyze", "Kaplan-Meier, RMST and log-rank analysis of a dataset"))
}

fn run() -> Result<(), CliError> {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let name: &'static str = match name {
        "effectsize" => "effectsize",
        "samplesize" => "samplesize",
        "calibrate" => "calibrate",
        "simulate" => "simulate",
        _ => "analyze",
    };
    let params = Params::load(name, sub)?;
    let format = params.text("format").unwrap_or("human").to_string();
    if !matches!(format.as_str(), "human" | "json" | "csv") {
        return Err(CliError::Usage(format!("unknown format {format:?}; use human, json or csv")));
    }
    let report = match name {
        "effectsize" => commands::effectsize(&params)?,
        "samplesize" => commands::samplesize(&params)?,
        "calibrate" => commands::calibrate(&params)?,
        "simulate" => commands::simulate(&params)?,
        _ => commands::analyze(&params)?,
    };
    let text = report.render(&format)?;
    match params.text("output") {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("survmix: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
