use alloc::vec::Vec;

use super::vectors::ReferenceVectorSet;
use crate::math;

/// Parents pooled from a run of angularly adjacent reference vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Niche {
    pub vectors: Vec<usize>,
    pub members: Vec<usize>,
}

/// `(local, global)` offspring counts: `local = floor(count * t / t_max)`.
pub fn offspring_split(count: usize, t: usize, t_max: usize) -> (usize, usize) {
    let local = if t_max == 0 { count } else { (count as u128 * t.min(t_max) as u128 / t_max as u128) as usize };
    (local, count - local)
}

/// Groups reference vectors into niches.
///
/// Vectors are visited by angle (for two objectives) or in lattice order,
/// and merged greedily until the pooled parents number at least two. A
/// trailing group with fewer than two parents joins the previous niche.
pub fn form_niches(assignment: &[usize], vectors: &ReferenceVectorSet) -> Vec<Niche> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    if vectors.current.first().is_some_and(|v| v.len() == 2) {
        let theta: Vec<f64> = vectors.current.iter().map(|v| math::atan2(v[1], v[0])).collect();
        order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]).then(a.cmp(&b)));
    }
    let mut members_of = alloc::vec![Vec::new(); vectors.len()];
    for (i, &k) in assignment.iter().enumerate() {
        members_of[k].push(i);
    }

    let mut niches: Vec<Niche> = Vec::new();
    let mut open = Niche { vectors: Vec::new(), members: Vec::new() };
    for k in order {
        open.vectors.push(k);
        open.members.extend_from_slice(&members_of[k]);
        if open.members.len() >= 2 {
            niches.push(core::mem::replace(&mut open, Niche { vectors: Vec::new(), members: Vec::new() }));
        }
    }
    if !open.vectors.is_empty() {
        match niches.last_mut() {
            Some(last) => {
                last.vectors.extend(open.vectors);
                last.members.extend(open.members);
            }
            None => niches.push(open),
        }
    }
    niches.retain(|n| !n.members.is_empty());
    niches
}

/// Local offspring quota of each niche, proportional to its pool size with
/// remainders going to the largest pools (lowest index on ties).
pub fn quotas(niches: &[Niche], local: usize) -> Vec<usize> {
    let total: usize = niches.iter().map(|n| n.members.len()).sum();
    if total == 0 {
        return alloc::vec![0; niches.len()];
    }
    let mut q: Vec<usize> = niches.iter().map(|n| local * n.members.len() / total).collect();
    let mut left = local - q.iter().sum::<usize>();
    let mut by_size: Vec<usize> = (0..niches.len()).collect();
    by_size.sort_by(|&a, &b| niches[b].members.len().cmp(&niches[a].members.len()).then(a.cmp(&b)));
    for &k in by_size.iter().cycle() {
        if left == 0 {
            break;
        }
        q[k] += 1;
        left -= 1;
    }
    q
}

/// Which pool each offspring draws its parents from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReproductionPlan {
    pub niches: Vec<Niche>,
    /// Niche index for each local offspring, in offspring order.
    pub local: Vec<usize>,
    pub global: usize,
}

impl ReproductionPlan {
    pub fn new(assignment: &[usize], vectors: &ReferenceVectorSet, count: usize, t: usize, t_max: usize) -> Self {
        let (local, global) = offspring_split(count, t, t_max);
        let niches = form_niches(assignment, vectors);
        let mut slots = Vec::with_capacity(local);
        for (k, q) in quotas(&niches, local).into_iter().enumerate() {
            slots.extend(core::iter::repeat_n(k, q));
        }
        ReproductionPlan { niches, local: slots, global }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        assert_eq!(offspring_split(500, 400, 800), (250, 250));
        assert_eq!(offspring_split(500, 0, 800), (0, 500));
        assert_eq!(offspring_split(500, 800, 800), (500, 0));
    }

    #[test]
    fn niches_pool_adjacent_vectors() {
        let v = ReferenceVectorSet::simplex_lattice(2, 4).unwrap(); // 5 vectors
        // vector index -> members: v0: 1, v1: 0, v2: 3, v3: 1, v4: 0
        let assignment = [0, 2, 2, 2, 3];
        let n = form_niches(&assignment, &v);
        let pooled: usize = n.iter().map(|n| n.members.len()).sum();
        assert_eq!(pooled, 5);
        assert!(n.iter().all(|n| n.members.len() >= 2));
        // vectors in angular order: v4 (0,1) first
        for niche in &n {
            let mut sorted = niche.vectors.clone();
            sorted.sort_unstable();
            assert!(sorted.windows(2).all(|w| w[1] == w[0] + 1), "{:?}", niche.vectors);
        }
    }

    #[test]
    fn single_parent_forms_a_single_niche() {
        let v = ReferenceVectorSet::simplex_lattice(2, 3).unwrap();
        let n = form_niches(&[2], &v);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].members, alloc::vec![0]);
    }

    #[test]
    fn quotas_sum_to_local_count() {
        let niches: Vec<Niche> = [3usize, 2, 2]
            .iter()
            .map(|&k| Niche { vectors: alloc::vec![0], members: (0..k).collect() })
            .collect();
        let q = quotas(&niches, 10);
        assert_eq!(q.iter().sum::<usize>(), 10);
        assert_eq!(q, alloc::vec![5, 3, 2]);
    }
}
