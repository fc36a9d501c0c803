//! File formats, pipelines, simulation experiments and the command-line
//! interface around [`ctmsm_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pipeline;

pub use error::{CliError, CliResult};

/// Environment variable holding the number of worker threads.
pub const THREADS_ENV: &str = "CTMSM_THREADS";
