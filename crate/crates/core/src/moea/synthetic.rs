//! A cheap real-valued stand-in problem for exercising the loop.
//!
//! The genome is a vector in `[0, 1]^d` and the objectives are
//! `(x0, 1 - sqrt(x0))`, whose Pareto front is the whole curve.

use alloc::vec::Vec;

use rand::Rng;

use super::evolution::{BatchEvaluator, Evaluation, Parents, Variation};
use crate::math;
use crate::rng::{standard_normal, StreamRng};

/// Blend crossover and Gaussian mutation on `[0, 1]^dims`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealVector {
    pub dims: usize,
    pub sigma: f64,
}

impl Default for RealVector {
    fn default() -> Self {
        RealVector { dims: 1, sigma: 0.1 }
    }
}

impl Variation for RealVector {
    type Genome = Vec<f64>;

    fn random(&mut self, _id: u64, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.dims).map(|_| rng.random::<f64>()).collect()
    }

    fn offspring(&mut self, parents: Parents<'_, Vec<f64>>, _id: u64, rng: &mut StreamRng) -> Vec<f64> {
        let mut child = match parents {
            Parents::One(a) => a.clone(),
            Parents::Two(a, b) => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let u = rng.random_range(-0.25..=1.25);
                    x + u * (y - x)
                })
                .collect(),
        };
        let p = 1.0 / self.dims as f64;
        for x in child.iter_mut() {
            if rng.random::<f64>() < p {
                *x += self.sigma * standard_normal(rng);
            }
            *x = x.clamp(0.0, 1.0);
        }
        child
    }
}

/// Objectives `(x0, 1 - sqrt(x0))`, always feasible.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConvexFront;

impl BatchEvaluator<Vec<f64>> for ConvexFront {
    type Detail = ();

    fn evaluate_batch(&mut self, genomes: &[&Vec<f64>]) -> Vec<Evaluation<()>> {
        genomes
            .iter()
            .map(|g| Evaluation { fitness: Some(alloc::vec![g[0], 1.0 - math::sqrt(g[0])]), cv: 0.0, detail: () })
            .collect()
    }
}

/// Hypervolume of the exact front for reference `(r1, r2)` with both
/// components at least 1.
pub fn analytic_hypervolume(reference: [f64; 2]) -> f64 {
    let [r1, r2] = reference;
    (r2 - 1.0) + 2.0 / 3.0 + (r1 - 1.0) * r2
}
