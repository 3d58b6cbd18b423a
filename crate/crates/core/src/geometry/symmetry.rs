use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Shape of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    /// Unit square, `a1 = (1, 0)`, `a2 = (0, 1)`.
    Square,
    /// 60 degree rhombus, `a1 = (1, 0)`, `a2 = (1/2, sqrt(3)/2)`.
    Rhombic,
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

impl Lattice {
    /// Physical position of fractional lattice coordinates `(u, v)`.
    #[inline]
    pub fn to_physical(self, u: f64, v: f64) -> (f64, f64) {
        match self {
            Lattice::Square => (u, v),
            Lattice::Rhombic => (u + 0.5 * v, SQRT3_2 * v),
        }
    }

    #[inline]
    pub fn to_fractional(self, x: f64, y: f64) -> (f64, f64) {
        match self {
            Lattice::Square => (x, y),
            Lattice::Rhombic => {
                let v = y / SQRT3_2;
                (x - 0.5 * v, v)
            }
        }
    }

    pub fn cell_area(self) -> f64 {
        match self {
            Lattice::Square => 1.0,
            Lattice::Rhombic => SQRT3_2,
        }
    }

    /// Grid edges used for boundary interpolation, as index offsets.
    pub fn edge_offsets(self) -> &'static [(i64, i64)] {
        match self {
            Lattice::Square => &[(1, 0), (0, 1)],
            Lattice::Rhombic => &[(1, 0), (0, 1), (-1, 1)],
        }
    }

    /// Neighbours used for connectivity (8 on the square grid, the 6
    /// triangular-lattice neighbours on the rhombic grid).
    pub fn neighbor_offsets(self) -> &'static [(i64, i64)] {
        match self {
            Lattice::Square => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)],
            Lattice::Rhombic => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)],
        }
    }
}

/// Supported plane groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GroupTag {
    P31m,
    P4mm,
    P4,
    P2mm,
    P1,
}

impl GroupTag {
    pub const ALL: [GroupTag; 5] = [GroupTag::P31m, GroupTag::P4mm, GroupTag::P4, GroupTag::P2mm, GroupTag::P1];

    pub fn name(self) -> &'static str {
        match self {
            GroupTag::P31m => "p31m",
            GroupTag::P4mm => "p4mm",
            GroupTag::P4 => "p4",
            GroupTag::P2mm => "p2mm",
            GroupTag::P1 => "p1",
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GroupTag::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(alloc::format!("unknown symmetry group `{s}` (expected p31m, p4mm, p4, p2mm or p1)")))
    }
}

/// Affine map on grid index coordinates: `p -> lin * p + off * m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Affine {
    pub lin: [[i64; 2]; 2],
    pub off: [i64; 2],
}

impl Affine {
    pub const IDENTITY: Affine = Affine { lin: [[1, 0], [0, 1]], off: [0, 0] };

    pub const fn new(lin: [[i64; 2]; 2], off: [i64; 2]) -> Self {
        Affine { lin, off }
    }

    #[inline]
    pub fn apply_int(&self, p: (i64, i64), m: i64) -> (i64, i64) {
        (
            self.lin[0][0] * p.0 + self.lin[0][1] * p.1 + self.off[0] * m,
            self.lin[1][0] * p.0 + self.lin[1][1] * p.1 + self.off[1] * m,
        )
    }

    #[inline]
    pub fn apply(&self, p: (f64, f64), m: f64) -> (f64, f64) {
        let l = |r: usize| self.lin[r][0] as f64 * p.0 + self.lin[r][1] as f64 * p.1 + self.off[r] as f64 * m;
        (l(0), l(1))
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Affine) -> Affine {
        let mut lin = [[0; 2]; 2];
        for (r, row) in lin.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = self.lin[r][0] * other.lin[0][c] + self.lin[r][1] * other.lin[1][c];
            }
        }
        let off = [
            self.lin[0][0] * other.off[0] + self.lin[0][1] * other.off[1] + self.off[0],
            self.lin[1][0] * other.off[0] + self.lin[1][1] * other.off[1] + self.off[1],
        ];
        Affine { lin, off }
    }

    pub fn det(&self) -> i64 {
        self.lin[0][0] * self.lin[1][1] - self.lin[0][1] * self.lin[1][0]
    }
}

/// A plane group acting on one unit cell.
///
/// `orbit_maps` are the point-group operations, written modulo lattice
/// translations; `mesh_maps` tile the cell with images of the meshing
/// domain returned by [`SymmetryGroup::in_mesh_domain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGroup {
    pub tag: GroupTag,
    pub lattice: Lattice,
    pub orbit_maps: Vec<Affine>,
    pub mesh_maps: Vec<Affine>,
}

const ROT90: Affine = Affine::new([[0, -1], [1, 0]], [1, 0]);
const MIRROR_X: Affine = Affine::new([[-1, 0], [0, 1]], [1, 0]);
const MIRROR_Y: Affine = Affine::new([[1, 0], [0, -1]], [0, 1]);
const SWAP: Affine = Affine::new([[0, 1], [1, 0]], [0, 0]);
// 120 degree rotation and a mirror along a1, in rhombic lattice coordinates.
const ROT120: Affine = Affine::new([[-1, -1], [1, 0]], [0, 0]);
const MIRROR_A1: Affine = Affine::new([[1, 1], [0, -1]], [0, 0]);
// Mirror across the short diagonal from a1 to a2.
const MIRROR_DIAG: Affine = Affine::new([[0, -1], [-1, 0]], [1, 1]);

fn powers(g: &Affine, n: usize) -> Vec<Affine> {
    let mut out = alloc::vec![Affine::IDENTITY];
    for k in 1..n {
        out.push(g.compose(&out[k - 1]));
    }
    out
}

impl SymmetryGroup {
    pub fn new(tag: GroupTag) -> Self {
        let (lattice, orbit_maps, mesh_maps) = match tag {
            GroupTag::P1 => (Lattice::Square, alloc::vec![Affine::IDENTITY], alloc::vec![Affine::IDENTITY]),
            GroupTag::P2mm => {
                let maps = alloc::vec![Affine::IDENTITY, MIRROR_X, MIRROR_Y, MIRROR_X.compose(&MIRROR_Y)];
                (Lattice::Square, maps.clone(), maps)
            }
            GroupTag::P4 => {
                let maps = powers(&ROT90, 4);
                (Lattice::Square, maps.clone(), maps)
            }
            GroupTag::P4mm => {
                let rot = powers(&ROT90, 4);
                let maps: Vec<Affine> =
                    rot.iter().flat_map(|r| [*r, r.compose(&SWAP)]).collect();
                (Lattice::Square, maps.clone(), maps)
            }
            GroupTag::P31m => {
                let rot = powers(&ROT120, 3);
                let maps = rot.iter().flat_map(|r| [*r, r.compose(&MIRROR_A1)]).collect();
                (Lattice::Rhombic, maps, alloc::vec![Affine::IDENTITY, MIRROR_DIAG])
            }
        };
        SymmetryGroup { tag, lattice, orbit_maps, mesh_maps }
    }

    pub fn order(&self) -> usize {
        self.orbit_maps.len()
    }

    /// Groups whose patches are bounded by the cell center lines need an
    /// even number of grid intervals so those lines are grid lines.
    pub fn needs_even_intervals(&self) -> bool {
        matches!(self.tag, GroupTag::P4mm | GroupTag::P4 | GroupTag::P2mm)
    }

    /// Fundamental patch membership of torus point `(i, j)`, `0 <= i, j < m`.
    ///
    /// * p1: the whole cell
    /// * p2mm, p4: the quadrant `[0, 1/2]^2`
    /// * p4mm: the triangle `0 <= y <= x <= 1/2`
    /// * p31m: the triangle with corners `0`, `a1` and `(a1 + a2)/3`
    pub fn in_patch(&self, i: i64, j: i64, m: i64) -> bool {
        match self.tag {
            GroupTag::P1 => true,
            GroupTag::P2mm | GroupTag::P4 => 2 * i <= m && 2 * j <= m,
            GroupTag::P4mm => j <= i && 2 * i <= m,
            GroupTag::P31m => j <= i && i + 2 * j <= m,
        }
    }

    /// Membership of index coordinates `(a, b)` in the meshing domain whose
    /// images under `mesh_maps` tile the cell.
    pub fn in_mesh_domain(&self, a: f64, b: f64, m: f64, tol: f64) -> bool {
        let h = 0.5 * m + tol;
        let nonneg = a >= -tol && b >= -tol;
        nonneg
            && match self.tag {
                GroupTag::P1 => a <= m + tol && b <= m + tol,
                GroupTag::P2mm | GroupTag::P4 => a <= h && b <= h,
                GroupTag::P4mm => b <= a + tol && a <= h,
                GroupTag::P31m => a + b <= m + tol,
            }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wrap(p: (i64, i64), m: i64) -> (i64, i64) {
        (p.0.rem_euclid(m), p.1.rem_euclid(m))
    }

    #[test]
    fn orbit_sizes() {
        let sizes: Vec<usize> = GroupTag::ALL.iter().map(|&t| SymmetryGroup::new(t).order()).collect();
        assert_eq!(sizes, alloc::vec![6, 8, 4, 4, 1]);
    }

    #[test]
    fn orbit_maps_form_groups_modulo_translations() {
        let m = 12;
        for tag in GroupTag::ALL {
            let g = SymmetryGroup::new(tag);
            for a in &g.orbit_maps {
                for b in &g.orbit_maps {
                    let ab = a.compose(b);
                    // closure: some element acts identically on the torus
                    let found = g.orbit_maps.iter().any(|c| {
                        (0..m).all(|i| (0..m).all(|j| wrap(ab.apply_int((i, j), m), m) == wrap(c.apply_int((i, j), m), m)))
                    });
                    assert!(found, "{tag}: not closed");
                }
            }
        }
    }

    #[test]
    fn patch_contains_a_representative_of_every_orbit() {
        for tag in GroupTag::ALL {
            let g = SymmetryGroup::new(tag);
            for m in [6i64, 12, 20, 34] {
                for i in 0..m {
                    for j in 0..m {
                        let hit = g.orbit_maps.iter().any(|op| {
                            let (a, b) = wrap(op.apply_int((i, j), m), m);
                            g.in_patch(a, b, m)
                        });
                        assert!(hit, "{tag} m={m} ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn mesh_maps_are_symmetries() {
        let m = 10;
        for tag in GroupTag::ALL {
            let g = SymmetryGroup::new(tag);
            for op in &g.mesh_maps {
                let same = g.orbit_maps.iter().any(|c| {
                    (0..m).all(|i| (0..m).all(|j| wrap(op.apply_int((i, j), m), m) == wrap(c.apply_int((i, j), m), m)))
                });
                assert!(same, "{tag}");
            }
        }
    }

    #[test]
    fn rhombic_round_trip() {
        let (x, y) = Lattice::Rhombic.to_physical(0.3, 0.7);
        let (u, v) = Lattice::Rhombic.to_fractional(x, y);
        assert!((u - 0.3).abs() < 1e-15 && (v - 0.7).abs() < 1e-15);
        assert!((Lattice::Rhombic.to_physical(0.0, 1.0).0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn p31m_rotation_is_120_degrees() {
        let l = Lattice::Rhombic;
        let (x, y) = l.to_physical(1.0, 0.0);
        let (a, b) = ROT120.apply((1.0, 0.0), 1.0);
        let (rx, ry) = l.to_physical(a, b);
        let c = (2.0 * core::f64::consts::PI / 3.0).cos();
        let s = (2.0 * core::f64::consts::PI / 3.0).sin();
        assert!((rx - (c * x - s * y)).abs() < 1e-12 && (ry - (s * x + c * y)).abs() < 1e-12);
    }

    #[test]
    fn parse_tags() {
        assert_eq!("P4MM".parse::<GroupTag>().unwrap(), GroupTag::P4mm);
        assert!("p6".parse::<GroupTag>().is_err());
    }
}
