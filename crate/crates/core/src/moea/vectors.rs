use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Lattice divisions giving at most `count` vectors in `m` objectives: the
/// largest `H` with `C(H + m - 1, m - 1) <= count` (at least 1).
pub fn lattice_divisions(m: usize, count: usize) -> usize {
    if m == 2 {
        return count.saturating_sub(1).max(1);
    }
    let mut h = 1;
    while binomial(h + 1 + m - 1, m - 1) <= count {
        h += 1;
    }
    h
}

/// Unit reference vectors with the smallest angle from each to any other.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceVectorSet {
    pub initial: Vec<Vec<f64>>,
    pub current: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
}

fn compositions(m: usize, h: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == m - 1 {
        let used: usize = prefix.iter().sum();
        let mut v = prefix.clone();
        v.push(h - used);
        out.push(v);
        return;
    }
    let used: usize = prefix.iter().sum();
    for i in (0..=h - used).rev() {
        prefix.push(i);
        compositions(m, h, prefix, out);
        prefix.pop();
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = math::norm(v);
    v.iter().map(|x| x / n).collect()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    math::acos(math::dot(a, b))
}

impl ReferenceVectorSet {
    /// Normalized simplex-lattice points with `h` divisions in `m` objectives.
    pub fn simplex_lattice(m: usize, h: usize) -> Result<Self> {
        if m < 2 || h < 1 {
            return Err(Error::Config(alloc::format!("reference vectors need M >= 2 and H >= 1 (got M = {m}, H = {h})")));
        }
        let mut points = Vec::new();
        compositions(m, h, &mut Vec::new(), &mut points);
        let initial: Vec<Vec<f64>> =
            points.iter().map(|p| normalized(&p.iter().map(|&i| i as f64 / h as f64).collect::<Vec<_>>())).collect();
        let mut set = ReferenceVectorSet { current: initial.clone(), initial, gamma: Vec::new() };
        set.update_gamma();
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    fn update_gamma(&mut self) {
        let v = &self.current;
        self.gamma = (0..v.len())
            .map(|i| {
                (0..v.len())
                    .filter(|&j| j != i)
                    .map(|j| angle(&v[i], &v[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
    }

    /// Rescales the initial vectors by the objective ranges
    /// `z_max - z_min`. Leaves the set untouched if any range component is
    /// at most `1e-12`.
    pub fn adapt(&mut self, z_min: &[f64], z_max: &[f64]) {
        let scale: Vec<f64> = z_max.iter().zip(z_min).map(|(hi, lo)| hi - lo).collect();
        if scale.iter().any(|&s| !(s > 1e-12) || !s.is_finite()) {
            return;
        }
        self.current = self
            .initial
            .iter()
            .map(|v| normalized(&v.iter().zip(&scale).map(|(a, s)| a * s).collect::<Vec<_>>()))
            .collect();
        self.update_gamma();
    }
}
