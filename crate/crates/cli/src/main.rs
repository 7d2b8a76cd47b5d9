mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "twistlab", version, about = "Central derivatives of quadratic twists and their mixed moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build a coefficient table and write it to the cache
    Coeffs,
    /// L'(1/2, f x chi_8d) for one d
    Lprime,
    /// The leading moment constants C0, C1 and their ingredients
    Constants,
    /// Empirical moment against the predicted main terms over an X ladder
    Moment,
    /// Run the oracle suites (and check cache files when --cache-dir is given)
    Verify,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Verify(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<twistlab::Error> for CliError {
    fn from(e: twistlab::Error) -> Self {
        use twistlab::Error as E;
        match e {
            E::InvalidInput(_) | E::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = RunConfig::resolve(&cli.flags).and_then(|cfg| match cli.command {
        Command::Coeffs => commands::coeffs(&cfg),
        Command::Lprime => commands::lprime(&cfg),
        Command::Constants => commands::constants(&cfg),
        Command::Moment => commands::moment(&cfg),
        Command::Verify => commands::verify(&cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twistlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
