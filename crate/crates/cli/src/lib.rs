//! Command-line front end: JSON documents, report emission and SVG rendering.

pub mod cli;
pub mod commands;
pub mod documents;
pub mod error;
pub mod reports;
pub mod svg;

pub use error::{CliError, CliResult};
