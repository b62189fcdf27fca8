//! The `stroketrace` command line, usable in-process through [`run`].

pub mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use stroketrace::Error;

use crate::args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Error },

    #[error(transparent)]
    Usage(#[from] clap::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Core(Error::Io {
            path: path.as_ref().to_owned(),
            source,
        })
    }

    /// 1 for I/O, 2 for bad input or flags, 3 for internal invariant breaches.
    pub fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => e,
            CliError::Usage(e) => return if e.use_stderr() { 2 } else { 0 },
            CliError::Internal(_) => return 3,
        };
        match core {
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Convert(a) => commands::convert_cmd(a),
        Command::Synth(a) => commands::synth_cmd(a),
        Command::Eval(a) => commands::eval_cmd(a),
        Command::Render(a) => commands::render_cmd(a),
        Command::Bench(a) => commands::bench_cmd(a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    execute(&Cli::try_parse_from(args)?)
}
