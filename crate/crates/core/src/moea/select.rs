use alloc::vec::Vec;

use super::apd::{apd, translate_objectives};
use super::vectors::ReferenceVectorSet;
use crate::math;
use crate::{Error, Result};

/// Objective vector and constraint violation of one selection candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<'a> {
    pub objectives: &'a [f64],
    pub cv: f64,
}

/// Index of the reference vector with the largest cosine to each translated
/// objective vector; ties go to the lowest vector index and zero vectors to
/// vector 0.
pub fn assign(translated: &[Vec<f64>], vectors: &ReferenceVectorSet) -> Vec<usize> {
    translated
        .iter()
        .map(|f| {
            let norm = math::norm(f);
            if norm == 0.0 {
                return 0;
            }
            let mut best = 0;
            let mut best_cos = f64::NEG_INFINITY;
            for (k, v) in vectors.current.iter().enumerate() {
                let cos = math::dot(f, v) / norm;
                if cos > best_cos {
                    best = k;
                    best_cos = cos;
                }
            }
            best
        })
        .collect()
}

/// One survivor per non-empty reference vector.
///
/// On each vector the feasible candidate (`cv == 0`) with the smallest
/// angle penalized distance wins; if none is feasible, the candidate with
/// the smallest violation wins. Ties go to the lowest candidate index.
/// Returns candidate indices in reference-vector order.
pub fn select(
    candidates: &[Candidate<'_>],
    vectors: &ReferenceVectorSet,
    t: usize,
    t_max: usize,
    alpha: f64,
) -> Result<Vec<usize>> {
    if candidates.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let objectives: Vec<&[f64]> = candidates.iter().map(|c| c.objectives).collect();
    let (translated, _) = translate_objectives(&objectives);
    let m = translated[0].len();
    let assignment = assign(&translated, vectors);

    // (is_feasible, key, index) of the current winner per vector.
    let mut best: Vec<Option<(bool, f64, usize)>> = alloc::vec![None; vectors.len()];
    for (i, (&k, c)) in assignment.iter().zip(candidates).enumerate() {
        let feasible = c.cv == 0.0;
        let key = if feasible {
            apd(&translated[i], &vectors.current[k], vectors.gamma[k], t, t_max, alpha, m)
        } else {
            c.cv
        };
        let better = match best[k] {
            None => true,
            Some((bf, bk, _)) => (feasible && !bf) || (feasible == bf && key < bk),
        };
        if better {
            best[k] = Some((feasible, key, i));
        }
    }
    Ok(best.into_iter().flatten().map(|(_, _, i)| i).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> ReferenceVectorSet {
        ReferenceVectorSet::simplex_lattice(2, 1).unwrap()
    }

    #[test]
    fn feasible_beats_infeasible_on_same_vector() {
        let a = [5.0, 0.1];
        let b = [1.0, 0.0];
        let ref_ = [0.0, 3.0];
        let cands = [
            Candidate { objectives: &a, cv: 0.0 },
            Candidate { objectives: &b, cv: 2.0 },
            Candidate { objectives: &ref_, cv: 0.0 },
        ];
        let s = select(&cands, &set(), 0, 10, 2.0).unwrap();
        assert_eq!(s, alloc::vec![0, 2]);
    }

    #[test]
    fn minimal_violation_when_nothing_is_feasible() {
        let o = [[4.0, 0.0], [5.0, 0.0], [6.0, 0.0], [0.0, 4.0]];
        let cands: Vec<Candidate> =
            o.iter().zip([3.0, 1.0, 2.0, 0.0]).map(|(f, cv)| Candidate { objectives: f, cv }).collect();
        let s = select(&cands, &set(), 0, 10, 2.0).unwrap();
        assert_eq!(s, alloc::vec![1, 3]);
    }

    #[test]
    fn empty_population_is_an_error() {
        assert!(matches!(select(&[], &set(), 0, 1, 2.0), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn ties_in_assignment_go_to_lowest_vector() {
        let f = alloc::vec![alloc::vec![1.0, 1.0], alloc::vec![0.0, 0.0]];
        assert_eq!(assign(&f, &set()), alloc::vec![0, 0]);
    }
}
