use alloc::vec::Vec;

use super::symmetry::{GroupTag, Lattice, SymmetryGroup};
use crate::{Error, Result};

/// Closed `n x n` sampling grid over one unit cell, with the orbit
/// representative of every point under a plane group.
#[derive(Debug, Clone)]
pub struct PointCloud {
    group: SymmetryGroup,
    n: usize,
    /// For every grid point, the grid index of its orbit representative.
    representative: Vec<usize>,
    /// Grid indices that are representatives, in increasing order.
    patch: Vec<usize>,
}

impl PointCloud {
    /// Builds the grid for `resolution` points per side.
    ///
    /// Square groups with mirror lines or rotation centres at the cell
    /// middle need an even number of intervals; an even resolution is raised
    /// by one for them (see [`PointCloud::resolution`]).
    pub fn new(tag: GroupTag, resolution: usize) -> Result<Self> {
        if resolution < 3 {
            return Err(Error::Config(alloc::format!("resolution must be at least 3, got {resolution}")));
        }
        let group = SymmetryGroup::new(tag);
        let mut n = resolution;
        if group.needs_even_intervals() && (n - 1) % 2 == 1 {
            n += 1;
        }
        let m = (n - 1) as i64;
        let mut representative = alloc::vec![usize::MAX; n * n];
        let mut patch = Vec::new();
        // Torus points first; the closing row and column copy the opposite edge.
        for j in 0..m {
            for i in 0..m {
                let mut best: Option<(i64, i64)> = None;
                for op in &group.orbit_maps {
                    let (a, b) = op.apply_int((i, j), m);
                    let (a, b) = (a.rem_euclid(m), b.rem_euclid(m));
                    if group.in_patch(a, b, m) && best.map_or(true, |(ba, bb)| (b, a) < (bb, ba)) {
                        best = Some((a, b));
                    }
                }
                let (a, b) = best.expect("patch covers every orbit");
                let rep = b as usize * n + a as usize;
                representative[j as usize * n + i as usize] = rep;
                if rep == j as usize * n + i as usize {
                    patch.push(rep);
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                if i as i64 == m || j as i64 == m {
                    let ti = i % (n - 1);
                    let tj = j % (n - 1);
                    representative[j * n + i] = representative[tj * n + ti];
                }
            }
        }
        patch.sort_unstable();
        Ok(PointCloud { group, n, representative, patch })
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn tag(&self) -> GroupTag {
        self.group.tag
    }

    pub fn lattice(&self) -> Lattice {
        self.group.lattice
    }

    /// Points per side actually used.
    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Number of grid intervals per side.
    pub fn intervals(&self) -> usize {
        self.n - 1
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    /// Physical position of grid point `(i, j)`.
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        self.index_to_physical(i as f64, j as f64)
    }

    /// Physical position of (fractional) grid index coordinates.
    pub fn index_to_physical(&self, a: f64, b: f64) -> (f64, f64) {
        let m = self.intervals() as f64;
        self.group.lattice.to_physical(a / m, b / m)
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|k| { let (i, j) = self.coords(k); self.position(i, j) }).collect()
    }

    pub fn representative(&self, idx: usize) -> usize {
        self.representative[idx]
    }

    /// Grid indices of the fundamental patch.
    pub fn patch(&self) -> &[usize] {
        &self.patch
    }

    /// Grid neighbour of `idx` at offset `(di, dj)`, without wrapping.
    #[inline]
    pub fn neighbor(&self, idx: usize, d: (i64, i64)) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let (a, b) = (i as i64 + d.0, j as i64 + d.1);
        let n = self.n as i64;
        (a >= 0 && b >= 0 && a < n && b < n).then(|| self.index(a as usize, b as usize))
    }
}
