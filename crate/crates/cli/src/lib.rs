//! Batch front end for `calabi-core`: job files, output formatting and the self-test.

pub mod checks;
pub mod jobs;
pub mod numfmt;

pub use jobs::{exit_code, run, Artifacts, CheckFailure, Command, EngineKind, EngineOptions, JobSpec};
