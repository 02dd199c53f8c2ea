//! Command-line front end for the `layerwind` solvers.
//!
//! Subcommands solve single problems, build two-mesh convergence tables, run
//! the fluid-particle pipeline and report corner compatibility. Problems come
//! from built-in presets or INI files whose coefficients are arithmetic
//! expressions in `x`, `t` and `eps`.

#![warn(missing_docs)]

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;

pub use commands::{run, Cli, Command, RunArgs};
pub use config::{Preset, RunConfig};
pub use error::CliError;
pub use expr::{parse_expr, Expr, ParseError};
