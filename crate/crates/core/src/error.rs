use alloc::string::String;

use crate::cppn::Marker;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("genome structure is invalid: {0}")]
    InvalidGenome(String),
    #[error("enabled connections form a cycle through node {0}")]
    Cycle(Marker),
    #[error("field is constant, min-max normalization is undefined")]
    DegenerateField,
    #[error("design contains no material")]
    EmptyDesign,
    #[error("meshing failed: {0}")]
    Meshing(String),
    #[error("stiffness system is singular (pivot {pivot:.3e} at dof {dof})")]
    SingularSystem { dof: usize, pivot: f64 },
    #[error("elastic tensor is degenerate: {0}")]
    DegenerateTensor(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("population is empty")]
    EmptyPopulation,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
