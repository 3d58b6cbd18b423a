use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::boundary::interpolate_crossing;
use super::cloud::PointCloud;
use super::field::SampledField;
use super::symmetry::{GroupTag, Lattice};
use crate::math;
use crate::{Error, Result};

/// Tolerance, in fractional cell coordinates, for matching vertices on
/// opposite cell edges.
pub const PERIODIC_TOLERANCE: f64 = 1e-9;

/// Merge tolerance in grid index units.
const MERGE: f64 = 1e-6;

/// Triangle mesh of the material phase of one unit cell.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TriangularMesh {
    /// Physical vertex positions.
    pub vertices: Vec<(f64, f64)>,
    /// Vertex positions in fractional lattice coordinates, in `[0, 1]^2`.
    pub fractional: Vec<(f64, f64)>,
    /// Counter-clockwise triangles.
    pub triangles: Vec<[usize; 3]>,
    /// `(slave, master)` pairs of vertices identified by periodicity.
    pub periodic_pairs: Vec<(usize, usize)>,
    pub cell_area: f64,
}

impl TriangularMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q.0 - p.0) * (r.1 - p.1) - (r.0 - p.0) * (q.1 - p.1))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn volume_fraction(&self) -> f64 {
        self.area() / self.cell_area
    }
}

/// Field value at fractional grid index coordinates, interpolated on the
/// grid cells (bilinear on squares, linear on the triangles of the rhombic
/// grid).
pub(crate) fn interpolate(values: &[f64], cloud: &PointCloud, a: f64, b: f64) -> f64 {
    let n = cloud.resolution();
    let m = cloud.intervals();
    let i = (math::floor(a).max(0.0) as usize).min(m - 1);
    let j = (math::floor(b).max(0.0) as usize).min(m - 1);
    let (fx, fy) = (a - i as f64, b - j as f64);
    let v = |di: usize, dj: usize| values[(j + dj) * n + i + di];
    match cloud.lattice() {
        Lattice::Square => {
            v(0, 0) * (1.0 - fx) * (1.0 - fy) + v(1, 0) * fx * (1.0 - fy) + v(0, 1) * (1.0 - fx) * fy + v(1, 1) * fx * fy
        }
        Lattice::Rhombic => {
            if fx + fy <= 1.0 {
                v(0, 0) + fx * (v(1, 0) - v(0, 0)) + fy * (v(0, 1) - v(0, 0))
            } else {
                v(1, 1) + (1.0 - fx) * (v(0, 1) - v(1, 1)) + (1.0 - fy) * (v(1, 0) - v(1, 1))
            }
        }
    }
}

/// Vertex set keyed by quantized grid coordinates.
struct VertexSet {
    keys: BTreeMap<(i64, i64), usize>,
    points: Vec<(f64, f64)>,
}

impl VertexSet {
    fn new() -> Self {
        VertexSet { keys: BTreeMap::new(), points: Vec::new() }
    }

    fn key(p: (f64, f64)) -> (i64, i64) {
        (math::round(p.0 / MERGE) as i64, math::round(p.1 / MERGE) as i64)
    }

    fn find(&self, p: (f64, f64)) -> Option<usize> {
        let (ka, kb) = Self::key(p);
        for da in -1..=1 {
            for db in -1..=1 {
                if let Some(&v) = self.keys.get(&(ka + da, kb + db)) {
                    let q = self.points[v];
                    if (q.0 - p.0).abs() <= MERGE && (q.1 - p.1).abs() <= MERGE {
                        return Some(v);
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, p: (f64, f64)) -> usize {
        if let Some(v) = self.find(p) {
            return v;
        }
        let v = self.points.len();
        self.points.push(p);
        self.keys.insert(Self::key(p), v);
        v
    }
}

fn snap(x: f64, m: f64) -> f64 {
    if x.abs() < MERGE {
        0.0
    } else if (x - m).abs() < MERGE {
        m
    } else {
        x
    }
}

/// Contour crossings on the diagonal of the p4mm meshing domain, which is
/// not a grid edge direction.
fn diagonal_crossings(field: &SampledField, cloud: &PointCloud) -> Vec<(f64, f64)> {
    let t = field.threshold;
    let mut out = Vec::new();
    for k in 0..cloud.intervals() / 2 {
        let (vp, vq) = (field.normalized[cloud.index(k, k)], field.normalized[cloud.index(k + 1, k + 1)]);
        let s = match (vp >= t, vq >= t) {
            (true, false) => k as f64 + interpolate_crossing(vp, vq, t),
            (false, true) => k as f64 + 1.0 - interpolate_crossing(vq, vp, t),
            _ => continue,
        };
        out.push((s, s));
    }
    out
}

/// Meshes the material phase.
///
/// The material inside the group's meshing domain is triangulated (Delaunay
/// on material grid points and boundary points, keeping triangles whose
/// centroid lies in material) and the result is replicated over the cell by
/// the group operations, so the mesh has the full symmetry of the design.
pub fn build_mesh(field: &SampledField, cloud: &PointCloud) -> Result<TriangularMesh> {
    let group = cloud.group();
    let m = cloud.intervals() as f64;
    let tol = 1e-9 * m;

    let mut local = VertexSet::new();
    for k in 0..cloud.len() {
        if field.labels[k] > 0 {
            let (i, j) = cloud.coords(k);
            if group.in_mesh_domain(i as f64, j as f64, m, tol) {
                local.insert((i as f64, j as f64));
            }
        }
    }
    let extra = if group.tag == GroupTag::P4mm { diagonal_crossings(field, cloud) } else { Vec::new() };
    for p in field.boundary.iter().map(|b| b.grid).chain(extra) {
        let p = (snap(p.0, m), snap(p.1, m));
        if group.in_mesh_domain(p.0, p.1, m, tol) {
            local.insert(p);
        }
    }
    if local.points.len() < 3 {
        return Err(Error::EmptyDesign);
    }

    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_to_local = BTreeMap::new();
    for (v, &(a, b)) in local.points.iter().enumerate() {
        let (x, y) = cloud.index_to_physical(a, b);
        let h = tri.insert(Point2::new(x, y)).map_err(|e| Error::Meshing(alloc::format!("{e:?}")))?;
        handle_to_local.entry(h.index()).or_insert(v);
    }

    if tri.num_inner_faces() == 0 {
        return Err(Error::Meshing(alloc::format!("{} material points span no triangle", local.points.len())));
    }

    let min_area = 1e-12 / (m * m);
    let mut local_tris = Vec::new();
    for face in tri.inner_faces() {
        let vs = face.vertices().map(|v| handle_to_local[&v.fix().index()]);
        let pts = vs.map(|v| local.points[v]);
        let c = ((pts[0].0 + pts[1].0 + pts[2].0) / 3.0, (pts[0].1 + pts[1].1 + pts[2].1) / 3.0);
        if interpolate(&field.normalized, cloud, c.0, c.1) < field.threshold {
            continue;
        }
        let phys = pts.map(|(a, b)| cloud.index_to_physical(a, b));
        let area = 0.5
            * ((phys[1].0 - phys[0].0) * (phys[2].1 - phys[0].1) - (phys[2].0 - phys[0].0) * (phys[1].1 - phys[0].1));
        if area.abs() <= min_area {
            continue;
        }
        local_tris.push(if area > 0.0 { vs } else { [vs[0], vs[2], vs[1]] });
    }
    if local_tris.is_empty() {
        return Err(Error::EmptyDesign);
    }

    let mut global = VertexSet::new();
    let mut triangles = Vec::with_capacity(local_tris.len() * group.mesh_maps.len());
    for op in &group.mesh_maps {
        let map: Vec<usize> = local
            .points
            .iter()
            .map(|&p| {
                let (a, b) = op.apply(p, m);
                global.insert((snap(a, m), snap(b, m)))
            })
            .collect();
        let flip = op.det() < 0;
        for &[a, b, c] in &local_tris {
            triangles.push(if flip { [map[a], map[c], map[b]] } else { [map[a], map[b], map[c]] });
        }
    }

    // Keep only vertices referenced by a triangle.
    let mut used = alloc::vec![usize::MAX; global.points.len()];
    let mut grid = Vec::new();
    for t in triangles.iter_mut() {
        for v in t.iter_mut() {
            if used[*v] == usize::MAX {
                used[*v] = grid.len();
                grid.push(global.points[*v]);
            }
            *v = used[*v];
        }
    }

    let fractional: Vec<(f64, f64)> = grid.iter().map(|&(a, b)| (a / m, b / m)).collect();
    let vertices: Vec<(f64, f64)> = grid.iter().map(|&(a, b)| cloud.index_to_physical(a, b)).collect();

    let mut by_position = VertexSet::new();
    for &p in &grid {
        by_position.insert(p);
    }
    let mut periodic_pairs = Vec::new();
    for (v, &(a, b)) in grid.iter().enumerate() {
        let on_a = (a - m).abs() <= PERIODIC_TOLERANCE * m;
        let on_b = (b - m).abs() <= PERIODIC_TOLERANCE * m;
        if !on_a && !on_b {
            continue;
        }
        let target = (if on_a { 0.0 } else { a }, if on_b { 0.0 } else { b });
        if let Some(master) = by_position.find(target) {
            if master != v {
                periodic_pairs.push((v, master));
            }
        }
    }

    Ok(TriangularMesh { vertices, fractional, triangles, periodic_pairs, cell_area: cloud.lattice().cell_area() })
}
