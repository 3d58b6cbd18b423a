//! Effective elastic properties of a periodic unit cell.
//!
//! Linear constant-strain triangles in plane stress, periodic fluctuation
//! fields by master-slave elimination, and the energy form of the
//! homogenized stiffness. Voigt order is `(xx, yy, xy)` with engineering
//! shear strain.

mod fem;
mod fitness;
mod material;
mod solver;
mod tensor;

pub use fem::{element_stiffness, homogenize, homogenized_stiffness, strain_matrix};
pub use fitness::{fitness_vector, Direction, Objective, Property, RATIO_SENTINEL};
pub use material::BaseMaterial;
pub use solver::{rcm_order, EnvelopeCholesky};
pub use tensor::{elastic_constants, ElasticTensor, Matrix3};
