//! Library surface of the CLI: configuration parsing and the command
//! implementations, reusable from integration tests.

pub mod commands;
pub mod config;
