//! Reference-vector-guided multi-objective evolution.
//!
//! Objectives are minimized. Individuals whose evaluation failed carry
//! [`FAILURE_SENTINEL`] in every objective and a positive constraint
//! violation, so they only ever win a reference vector on which nothing is
//! feasible.

mod apd;
mod evolution;
mod niche;
mod pareto;
mod select;
pub mod synthetic;
mod vectors;

pub use apd::{apd, translate_objectives};
pub use evolution::{
    BatchEvaluator, Evaluation, Evolution, Individual, Parents, RveaConfig, Variation, FAILURE_SENTINEL,
};
pub use niche::{form_niches, offspring_split, quotas, Niche, ReproductionPlan};
pub use pareto::{dominates, hypervolume, non_dominated};
pub use select::{assign, select, Candidate};
pub use vectors::{binomial, lattice_divisions, ReferenceVectorSet};
