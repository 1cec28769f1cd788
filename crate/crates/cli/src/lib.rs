//! File formats and command dispatch for the `crnf` binary.

pub mod commands;
pub mod format;
