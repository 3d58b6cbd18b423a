//! Files, archives and the command line around `metacell-core`.
//!
//! * [`config`]: TOML or JSON run configuration.
//! * [`genome_io`]: JSON genome files.
//! * [`archive`]: the append-only record archive and its index.
//! * [`runner`]: parallel evaluation, run orchestration and the manifest.
//! * [`reconstruct`]: designs rebuilt from archived genomes.
//! * [`export`]: Pareto fronts, family tables and genome bundles.
//! * [`render`]: SVG drawings and OFF meshes.
//! * [`verify`]: the property suites behind `metacell verify`.

pub mod archive;
pub mod config;
mod error;
pub mod export;
pub mod genome_io;
pub mod reconstruct;
pub mod render;
pub mod runner;
pub mod verify;

pub use error::{Error, Result};
pub use metacell_core as core;
