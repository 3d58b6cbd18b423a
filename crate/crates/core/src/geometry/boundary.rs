use alloc::vec::Vec;

use super::cloud::PointCloud;

/// A point on the threshold contour, interpolated on one grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryPoint {
    /// Fractional grid index coordinates.
    pub grid: (f64, f64),
    /// Physical position.
    pub position: (f64, f64),
    /// Grid index of the material end of the edge.
    pub inside: usize,
    /// Grid index of the void end of the edge.
    pub outside: usize,
}

/// Fraction along `p -> q` where the linear interpolant crosses `threshold`.
///
/// `value_p` is on the material side (`>= threshold`) and `value_q` below it.
#[inline]
pub fn interpolate_crossing(value_p: f64, value_q: f64, threshold: f64) -> f64 {
    ((value_p - threshold) / (value_p - value_q)).clamp(0.0, 1.0)
}

/// Boundary points on every grid edge whose ends straddle the threshold.
pub fn extract_boundary(normalized: &[f64], cloud: &PointCloud, threshold: f64) -> Vec<BoundaryPoint> {
    let mut out = Vec::new();
    let offsets = cloud.lattice().edge_offsets();
    for a in 0..cloud.len() {
        for &d in offsets {
            let Some(b) = cloud.neighbor(a, d) else { continue };
            let (va, vb) = (normalized[a], normalized[b]);
            let (p, q, vp, vq) = match (va >= threshold, vb >= threshold) {
                (true, false) => (a, b, va, vb),
                (false, true) => (b, a, vb, va),
                _ => continue,
            };
            let rho = interpolate_crossing(vp, vq, threshold);
            let (pi, pj) = cloud.coords(p);
            let (qi, qj) = cloud.coords(q);
            let grid = (pi as f64 + rho * (qi as f64 - pi as f64), pj as f64 + rho * (qj as f64 - pj as f64));
            out.push(BoundaryPoint { grid, position: cloud.index_to_physical(grid.0, grid.1), inside: p, outside: q });
        }
    }
    out
}
