//! Compositional pattern-producing network genomes.
//!
//! A [`Genome`] is a NEAT-style gene list: node genes carry an activation and a
//! bias, connection genes carry a weight and an enable bit, and every gene is
//! tagged with a global historical [`Marker`] issued by the
//! [`InnovationRegistry`]. Markers align genes for [`crossover`] and
//! [`similarity`].

mod activation;
mod crossover;
mod eval;
mod genome;
mod mutate;
mod registry;
mod similarity;

pub use activation::Activation;
pub use crossover::crossover;
pub use eval::{evaluate, evaluate_batch, CompiledCppn};
pub use genome::{ConnectionGene, Genome, Marker, NodeGene, NodeKind, INPUT_X, INPUT_Y, OUTPUT};
pub use mutate::{initial_genome, mutate, MutationRates};
pub use registry::{Innovation, InnovationRegistry};
pub use similarity::{similarity, SimilarityCoefficients};
