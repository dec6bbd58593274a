//! Batch front end: configuration, task orchestration, reports and field dumps.

pub mod config;
pub mod io;
pub mod report;
pub mod tasks;

pub use config::{RunConfig, Task};
pub use tasks::{run_task, Outcome};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const NONCONVERGENCE: i32 = 2;
    pub const INVARIANT: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] hamsys::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hamsys::Error as E;
        match self {
            CliError::Core(
                E::NonConvergence { .. }
                | E::Unconverged { .. }
                | E::StepUnderflow { .. }
                | E::NoSolution(_)
                | E::DegenerateDirection(_),
            ) => exit::NONCONVERGENCE,
            _ => exit::VALIDATION,
        }
    }
}
