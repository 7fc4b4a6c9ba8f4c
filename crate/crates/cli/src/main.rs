mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{extract_overrides, Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Asset(String),
    CapHit(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn from_core(e: pace_align::Error) -> Self {
        if e.is_asset_error() {
            CliError::Asset(e.to_string())
        } else if let pace_align::Error::Config(_) = e {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.into())
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Asset(_) => 3,
            CliError::CapHit(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Asset(m) => write!(f, "asset error: {m}"),
            CliError::CapHit(m) => write!(f, "cap hit: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (argv, overrides) = match extract_overrides(std::env::args().collect()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    if !overrides.is_empty() && matches!(cli.command, Command::Validate(_)) {
        eprintln!("config error: validate does not take overrides");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Run(a) => commands::run(a, overrides),
        Command::Compare(a) => commands::compare(a, overrides),
        Command::Validate(a) => commands::validate(a),
        Command::Serve(a) => commands::serve(a, overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
