//! File formats, a parallel trial executor and the `subdiag` command line
//! on top of `subdiag-core`.

pub mod commands;
pub mod files;
pub mod parallel;

pub use commands::run_command;
