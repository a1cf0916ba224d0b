//! Command-line front end for `qsl-core`.
//!
//! Exit codes: 0 on success, 1 when a verification fails (gate does not
//! saturate the bound, or a search undercuts it), 2 on usage errors, 3 on
//! runtime errors such as unreadable or invalid input files.

pub mod args;
pub mod commands;
pub mod output;

pub use args::{Cli, Command};

use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

/// Bad flag combination or value, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Whether a command's checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Passed
        } else {
            Status::Failed
        }
    }
}

/// Runs a parsed command and maps the outcome to an exit code, printing
/// errors to stderr.
pub fn run(cli: Cli) -> i32 {
    match commands::dispatch(&cli) {
        Ok(Status::Passed) => exit::SUCCESS,
        Ok(Status::Failed) => exit::VERIFICATION_FAILED,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                exit::USAGE
            } else {
                exit::RUNTIME
            }
        }
    }
}
