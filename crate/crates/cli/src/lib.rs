//! IO, file formats, and command implementations for the sparse-view CT
//! reconstruction toolbox. The numerical kernels live in `sparsect-core`;
//! this crate adds serialization (raw f64 grids with JSON sidecars, 16-bit
//! PGM export, versioned model files, CSV traces and reports) and the CLI
//! commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, CliResult};
