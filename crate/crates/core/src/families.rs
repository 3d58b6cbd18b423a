//! Sequential clustering of genomes into families.

use alloc::vec::Vec;

use crate::cppn::{similarity, Genome, SimilarityCoefficients};

/// Distance below which a genome joins a family.
pub const DEFAULT_FAMILY_THRESHOLD: f64 = 1.35;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Family {
    pub id: usize,
    /// Genome id of the founding member.
    pub representative: u64,
    /// Genome ids, in input order.
    pub members: Vec<u64>,
}

/// Assigns each genome, in the given order, to the first family whose
/// representative is closer than `threshold`, founding a new family
/// otherwise.
pub fn cluster_families(genomes: &[&Genome], coeffs: &SimilarityCoefficients, threshold: f64) -> Vec<Family> {
    let mut reps: Vec<&Genome> = Vec::new();
    let mut families: Vec<Family> = Vec::new();
    for g in genomes {
        match reps.iter().position(|r| similarity(r, g, coeffs) < threshold) {
            Some(k) => families[k].members.push(g.id()),
            None => {
                families.push(Family { id: families.len(), representative: g.id(), members: alloc::vec![g.id()] });
                reps.push(g);
            }
        }
    }
    families
}
