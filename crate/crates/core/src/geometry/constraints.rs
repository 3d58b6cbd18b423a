use alloc::vec::Vec;

use super::cloud::PointCloud;
use super::field::Label;
use super::union_find::UnionFind;

/// Connectivity of the material phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintReport {
    /// Connected material components inside the closed cell.
    pub interior_components: usize,
    /// Material percolates between a point and its copy one cell along `a1`.
    pub x_connected: bool,
    /// Same along `a2`.
    pub y_connected: bool,
    /// `max(0, components - 1) + !x + !y`; the number of grid points for an
    /// empty design.
    pub violation: u32,
}

impl ConstraintReport {
    pub fn feasible(&self) -> bool {
        self.violation == 0
    }
}

/// Counts components and checks percolation across a 2x2 periodic tiling.
pub fn check_constraints(labels: &[Label], cloud: &PointCloud) -> ConstraintReport {
    let n = cloud.resolution();
    let offsets = cloud.lattice().neighbor_offsets();
    if !labels.iter().any(|&l| l > 0) {
        return ConstraintReport {
            interior_components: 0,
            x_connected: false,
            y_connected: false,
            violation: (n * n) as u32,
        };
    }

    let mut uf = UnionFind::new(n * n);
    for p in 0..n * n {
        if labels[p] <= 0 {
            continue;
        }
        for &d in offsets {
            if let Some(q) = cloud.neighbor(p, d) {
                if labels[q] > 0 {
                    uf.union(p, q);
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..n * n).filter(|&p| labels[p] > 0).map(|p| uf.find(p)).collect();
    roots.sort_unstable();
    roots.dedup();
    let components = roots.len();

    // Torus of 2m x 2m points built from the periodic part of the cell.
    let m = n - 1;
    let w = 2 * m;
    let solid = |i: usize, j: usize| labels[(j % m) * n + (i % m)] > 0;
    let mut tuf = UnionFind::new(w * w);
    for j in 0..w {
        for i in 0..w {
            if !solid(i, j) {
                continue;
            }
            for &(di, dj) in offsets {
                let a = (i as i64 + di).rem_euclid(w as i64) as usize;
                let b = (j as i64 + dj).rem_euclid(w as i64) as usize;
                if solid(a, b) {
                    tuf.union(j * w + i, b * w + a);
                }
            }
        }
    }
    let mut x_connected = false;
    let mut y_connected = false;
    for j in 0..m {
        for i in 0..m {
            if !solid(i, j) {
                continue;
            }
            let p = j * w + i;
            x_connected |= tuf.same(p, j * w + i + m);
            y_connected |= tuf.same(p, (j + m) * w + i);
        }
    }
    let violation = (components - 1) as u32 + u32::from(!x_connected) + u32::from(!y_connected);
    ConstraintReport { interior_components: components, x_connected, y_connected, violation }
}
