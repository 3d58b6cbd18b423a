use crate::{Error, Result};

pub type Matrix3 = [[f64; 3]; 3];

/// Homogenized stiffness `c`, compliance `s` and the averaged Young's
/// modulus and Poisson ratio derived from `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElasticTensor {
    pub c: Matrix3,
    pub s: Matrix3,
    pub e_avg: f64,
    pub nu_avg: f64,
}

fn det(c: &Matrix3) -> f64 {
    c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
}

pub(crate) fn frobenius(c: &Matrix3) -> f64 {
    crate::math::sqrt(c.iter().flatten().map(|x| x * x).sum())
}

/// Inverse of a 3x3 matrix, or `None` when it is numerically singular.
pub(crate) fn invert(c: &Matrix3) -> Option<Matrix3> {
    let d = det(c);
    let scale = frobenius(c);
    if !(d.abs() > 1e-12 * scale * scale * scale) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *x = (c[r0][c0] * c[r1][c1] - c[r0][c1] * c[r1][c0]) / d;
        }
    }
    Some(inv)
}

/// Average Young's modulus and Poisson ratio from a compliance matrix:
/// `E = (1/S11 + 1/S22) / 2`, `nu = -(S21/S11 + S12/S22) / 2`.
pub fn elastic_constants(s: &Matrix3) -> Result<(f64, f64)> {
    let (s11, s22) = (s[0][0], s[1][1]);
    if s11 == 0.0 || s22 == 0.0 || !s11.is_finite() || !s22.is_finite() {
        return Err(Error::DegenerateTensor(alloc::format!("zero diagonal compliance (S11 = {s11}, S22 = {s22})")));
    }
    let e = 0.5 * (1.0 / s11 + 1.0 / s22);
    let nu = -0.5 * (s[1][0] / s11 + s[0][1] / s22);
    Ok((e, nu))
}

impl ElasticTensor {
    /// Inverts `c` and derives the averaged constants.
    pub fn from_stiffness(c: Matrix3) -> Result<Self> {
        let s = invert(&c).ok_or_else(|| Error::DegenerateTensor("stiffness matrix is singular".into()))?;
        let (e_avg, nu_avg) = elastic_constants(&s)?;
        Ok(ElasticTensor { c, s, e_avg, nu_avg })
    }

    /// Frobenius norm of `c`.
    pub fn norm(&self) -> f64 {
        frobenius(&self.c)
    }

    /// `|C33 - (C11 - C12)/2| / |C|`, zero for an isotropic tensor.
    pub fn isotropy_residual(&self) -> f64 {
        let c = &self.c;
        (c[2][2] - 0.5 * (c[0][0] - c[0][1])).abs() / self.norm()
    }
}
