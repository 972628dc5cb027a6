//! Front end for `arcsine-core`: flag and config parsing, dispatch, and
//! CSV/JSON rendering.

pub mod args;
mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use arcsine_core::Error as CoreError;

pub use args::Cli;
pub use commands::execute;

/// Failure of a CLI invocation, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, grids or model parameters (exit code 2).
    #[error("{0}")]
    Usage(String),
    /// A numerical routine failed (exit code 1).
    #[error(transparent)]
    Numeric(#[from] CoreError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }

    /// Reclassifies a domain error on a user-supplied value as a usage error
    /// naming the flag it came from.
    pub(crate) fn from_input(e: CoreError) -> Self {
        match &e {
            CoreError::InvalidParameter { name, .. } => CliError::Usage(format!("--{}: {e}", flag_for(name))),
            _ => CliError::Numeric(e),
        }
    }
}

fn flag_for(core_name: &str) -> String {
    match core_name {
        "N" => "inversion-order".into(),
        "x_min" | "interval" => "x".into(),
        other => other.replace('_', "-"),
    }
}

/// Parses `args` (program name first), runs the subcommand and writes the
/// artifact. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match run_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(args: Vec<OsString>) -> Result<(), CliError> {
    let args = config::merge(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().trim_start_matches("error: ").to_string())),
    };
    let artifact = execute(&cli)?;
    match &cli.output {
        Some(path) => std::fs::write(path, artifact)?,
        None => std::io::stdout().lock().write_all(artifact.as_bytes())?,
    }
    Ok(())
}
