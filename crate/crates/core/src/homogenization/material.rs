use crate::{Error, Result};

use super::tensor::Matrix3;

/// Isotropic constituent material, plane stress with unit thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BaseMaterial {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Default for BaseMaterial {
    fn default() -> Self {
        BaseMaterial { youngs_modulus: 1.0, poisson_ratio: 0.3 }
    }
}

impl BaseMaterial {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let m = BaseMaterial { youngs_modulus, poisson_ratio };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(Error::Config(alloc::format!("Young's modulus must be positive, got {}", self.youngs_modulus)));
        }
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio < 1.0) {
            return Err(Error::Config(alloc::format!("Poisson ratio must lie in (-1, 1), got {}", self.poisson_ratio)));
        }
        Ok(())
    }

    /// Plane-stress constitutive matrix.
    pub fn stiffness(&self) -> Matrix3 {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        let k = e / (1.0 - nu * nu);
        [[k, k * nu, 0.0], [k * nu, k, 0.0], [0.0, 0.0, k * (1.0 - nu) / 2.0]]
    }
}
