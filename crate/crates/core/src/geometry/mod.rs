//! From genome to phenotype.
//!
//! A genome is sampled on a closed grid over one unit cell. Only points of a
//! fundamental patch are fed to the network; every other point copies the
//! value of its orbit representative, so plane-group symmetry and
//! periodicity hold exactly. The raw field is min-max normalized, thresholded
//! into material (`+1`) and void (`-1`), boundary points are interpolated on
//! grid edges that cross the threshold, and the material region is meshed
//! with triangles.
//!
//! Grid points are addressed by integer lattice indices `(i, j)` with
//! `0 <= i, j <= m` where `m = n - 1`; physical coordinates are
//! `(i/m) a1 + (j/m) a2` for the lattice vectors of the cell.

mod boundary;
mod cloud;
mod constraints;
mod field;
mod mesh;
mod symmetry;
mod union_find;

pub use boundary::{extract_boundary, interpolate_crossing, BoundaryPoint};
pub use cloud::PointCloud;
pub use constraints::{check_constraints, ConstraintReport};
pub use field::{label, normalize, sample_field, sample_patch, Label, SampledField, DEFAULT_THRESHOLD};
pub use mesh::{build_mesh, TriangularMesh, PERIODIC_TOLERANCE};
pub use symmetry::{Affine, GroupTag, Lattice, SymmetryGroup};
pub use union_find::UnionFind;
