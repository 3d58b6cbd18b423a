//! Core algorithms for evolving periodic metamaterial unit cells.
//!
//! The crate is `no_std` (it needs `alloc`) and free of IO. It contains:
//!
//! * [`cppn`]: NEAT-style compositional pattern-producing network genomes,
//!   their evaluation, mutation, crossover and genetic distance.
//! * [`geometry`]: plane-group symmetric sampling of a genome on a point cloud,
//!   min-max normalization, thresholding, boundary interpolation, triangular
//!   meshing and periodic connectivity constraints.
//! * [`homogenization`]: linear-triangle periodic homogenization of plane-stress
//!   elasticity and the scalar properties derived from the compliance tensor.
//! * [`moea`]: the reference-vector-guided evolutionary loop with angle
//!   penalized distance, constraint-violation elitism and niche reproduction.
//! * [`design`]: the glue that turns a genome into an evaluated design.
//! * [`families`]: sequential genome clustering into families.
//!
//! IO, archives, configuration files and the command line live in the
//! companion `metacell` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cppn;
pub mod design;
mod error;
pub mod families;
pub mod geometry;
pub mod homogenization;
pub(crate) mod math;
pub mod moea;
pub mod rng;

pub use error::{Error, Result};
