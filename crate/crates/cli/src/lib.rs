//! Config-driven front end for `qinfluence-core`.
//!
//! ```text
//! qinfluence <command> --config <path> [--out <dir>] [--seed <int>]
//! ```
//!
//! Exit codes: 0 on success, 1 on a computational or I/O failure, 2 on a
//! configuration error. Every invocation writes `summary.json` to the output
//! directory.

pub mod app;
pub mod config;
pub mod output;
pub mod run;
