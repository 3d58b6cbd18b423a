use alloc::vec::Vec;

use super::material::BaseMaterial;
use super::solver::{rcm_order, EnvelopeCholesky};
use super::tensor::{ElasticTensor, Matrix3};
use crate::geometry::TriangularMesh;
use crate::{Error, Result};

/// Signed area and strain-displacement matrix of a linear triangle, for
/// element displacements ordered `(u1, v1, u2, v2, u3, v3)`.
pub fn strain_matrix(p: [(f64, f64); 3]) -> (f64, [[f64; 6]; 3]) {
    let [(x1, y1), (x2, y2), (x3, y3)] = p;
    let two_a = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    let b = [y2 - y3, y3 - y1, y1 - y2];
    let c = [x3 - x2, x1 - x3, x2 - x1];
    let mut m = [[0.0; 6]; 3];
    for k in 0..3 {
        m[0][2 * k] = b[k] / two_a;
        m[1][2 * k + 1] = c[k] / two_a;
        m[2][2 * k] = c[k] / two_a;
        m[2][2 * k + 1] = b[k] / two_a;
    }
    (0.5 * two_a, m)
}

/// `A B^T D B` for one triangle.
pub fn element_stiffness(p: [(f64, f64); 3], d: &Matrix3) -> [[f64; 6]; 6] {
    let (area, b) = strain_matrix(p);
    let mut db = [[0.0; 6]; 3];
    for r in 0..3 {
        for c in 0..6 {
            db[r][c] = (0..3).map(|k| d[r][k] * b[k][c]).sum();
        }
    }
    let mut k = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            k[i][j] = area * (0..3).map(|r| b[r][i] * db[r][j]).sum::<f64>();
        }
    }
    k
}

const UNIT_STRAINS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Degree-of-freedom numbering after periodic elimination and pinning.
struct DofMap {
    /// Reduced dof of `(vertex, component)`, `None` for the pinned vertex.
    dof: Vec<Option<usize>>,
    count: usize,
}

impl DofMap {
    fn new(mesh: &TriangularMesh) -> Self {
        let nv = mesh.vertices.len();
        let mut rep: Vec<usize> = (0..nv).collect();
        for &(s, m) in &mesh.periodic_pairs {
            rep[s] = m;
        }
        for v in 0..nv {
            let mut r = rep[v];
            while rep[r] != r {
                r = rep[r];
            }
            rep[v] = r;
        }
        let pinned = mesh.periodic_pairs.iter().map(|&(_, m)| rep[m]).min().unwrap_or(0);

        let mut reduced = alloc::vec![usize::MAX; nv];
        let mut nodes = 0;
        for v in 0..nv {
            if rep[v] == v && v != pinned {
                reduced[v] = nodes;
                nodes += 1;
            }
        }
        let mut adjacency = alloc::vec![Vec::new(); nodes];
        for t in &mesh.triangles {
            let r = t.map(|v| reduced[rep[v]]);
            for &a in &r {
                for &b in &r {
                    if a != b && a != usize::MAX && b != usize::MAX {
                        adjacency[a].push(b);
                    }
                }
            }
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let order = rcm_order(&adjacency);
        let mut position = alloc::vec![0; nodes];
        for (k, &node) in order.iter().enumerate() {
            position[node] = k;
        }
        let mut dof = alloc::vec![None; 2 * nv];
        for v in 0..nv {
            let r = reduced[rep[v]];
            if r != usize::MAX {
                dof[2 * v] = Some(2 * position[r]);
                dof[2 * v + 1] = Some(2 * position[r] + 1);
            }
        }
        DofMap { dof, count: 2 * nodes }
    }

    fn element(&self, t: &[usize; 3]) -> [Option<usize>; 6] {
        let mut out = [None; 6];
        for (k, &v) in t.iter().enumerate() {
            out[2 * k] = self.dof[2 * v];
            out[2 * k + 1] = self.dof[2 * v + 1];
        }
        out
    }
}

fn corners(mesh: &TriangularMesh, t: &[usize; 3]) -> [(f64, f64); 3] {
    t.map(|v| mesh.vertices[v])
}

/// Homogenized Voigt stiffness of the meshed cell.
pub fn homogenized_stiffness(mesh: &TriangularMesh, material: &BaseMaterial) -> Result<Matrix3> {
    material.validate()?;
    if mesh.triangles.is_empty() {
        return Err(Error::EmptyDesign);
    }
    let d = material.stiffness();
    let map = DofMap::new(mesh);
    let n = map.count;

    let mut first: Vec<usize> = (0..n).collect();
    for t in &mesh.triangles {
        let dofs = map.element(t);
        let lo = dofs.iter().flatten().copied().min();
        if let Some(lo) = lo {
            for &i in dofs.iter().flatten() {
                first[i] = first[i].min(lo);
            }
        }
    }
    let mut k = EnvelopeCholesky::with_envelope(first);
    let mut loads = alloc::vec![alloc::vec![0.0; n]; 3];
    for t in &mesh.triangles {
        let p = corners(mesh, t);
        let ke = element_stiffness(p, &d);
        let (area, b) = strain_matrix(p);
        let dofs = map.element(t);
        for (a, da) in dofs.iter().enumerate() {
            let Some(i) = *da else { continue };
            for (c, dc) in dofs.iter().enumerate() {
                if let Some(j) = *dc {
                    k.add(i, j, ke[a][c]);
                }
            }
            for (load, eps) in loads.iter_mut().zip(UNIT_STRAINS) {
                let sigma: [f64; 3] = core::array::from_fn(|r| (0..3).map(|q| d[r][q] * eps[q]).sum());
                load[i] -= area * (0..3).map(|r| b[r][a] * sigma[r]).sum::<f64>();
            }
        }
    }

    let unfactored = k.clone();
    k.factor()?;
    let mut fields = Vec::with_capacity(3);
    for load in &loads {
        let mut x = load.clone();
        k.solve_in_place(&mut x);
        let scale = load.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
        for _ in 0..3 {
            let ax = unfactored.multiply(&x);
            let mut r: Vec<f64> = load.iter().zip(&ax).map(|(f, a)| f - a).collect();
            let res = r.iter().map(|v| v * v).sum::<f64>();
            if res <= 1e-20 * scale {
                break;
            }
            k.solve_in_place(&mut r);
            for (xi, ri) in x.iter_mut().zip(&r) {
                *xi += ri;
            }
        }
        let ax = unfactored.multiply(&x);
        let res = load.iter().zip(&ax).map(|(f, a)| (f - a) * (f - a)).sum::<f64>();
        if !(res <= 1e-12 * scale) {
            return Err(Error::SingularSystem { dof: n, pivot: crate::math::sqrt(res / scale) });
        }
        fields.push(x);
    }

    let mut c = [[0.0; 3]; 3];
    for t in &mesh.triangles {
        let (area, b) = strain_matrix(corners(mesh, t));
        let dofs = map.element(t);
        let strains: [[f64; 3]; 3] = core::array::from_fn(|k| {
            let u: [f64; 6] = core::array::from_fn(|a| dofs[a].map_or(0.0, |i| fields[k][i]));
            core::array::from_fn(|r| UNIT_STRAINS[k][r] + (0..6).map(|a| b[r][a] * u[a]).sum::<f64>())
        });
        for i in 0..3 {
            let di: [f64; 3] = core::array::from_fn(|r| (0..3).map(|q| d[r][q] * strains[i][q]).sum());
            for j in i..3 {
                c[i][j] += area * (0..3).map(|r| di[r] * strains[j][r]).sum::<f64>();
            }
        }
    }
    for i in 0..3 {
        for j in i..3 {
            c[i][j] /= mesh.cell_area;
            c[j][i] = c[i][j];
        }
    }
    Ok(c)
}

/// Homogenized tensor with averaged constants.
pub fn homogenize(mesh: &TriangularMesh, material: &BaseMaterial) -> Result<ElasticTensor> {
    ElasticTensor::from_stiffness(homogenized_stiffness(mesh, material)?)
}
