//! SVG drawings and OFF meshes.

use std::fmt::Write as _;

use metacell_core::geometry::{Lattice, TriangularMesh};

const SCALE: f64 = 200.0;
const MARGIN: f64 = 20.0;

/// Path data of every triangle of `mesh`, translated by `shift`, in SVG
/// coordinates (y pointing down) with `origin` as the lower-left corner.
fn triangles_path(out: &mut String, mesh: &TriangularMesh, shift: (f64, f64), origin: (f64, f64)) {
    for t in &mesh.triangles {
        for (k, &v) in t.iter().enumerate() {
            let (x, y) = mesh.vertices[v];
            let sx = origin.0 + (x + shift.0) * SCALE;
            let sy = origin.1 - (y + shift.1) * SCALE;
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(out, "{cmd}{sx:.3} {sy:.3}");
        }
        out.push('Z');
    }
}

fn cell_outline(lattice: Lattice, shift: (f64, f64), origin: (f64, f64)) -> String {
    [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        .iter()
        .map(|&(u, v)| {
            let (x, y) = lattice.to_physical(u, v);
            format!("{:.3},{:.3}", origin.0 + (x + shift.0) * SCALE, origin.1 - (y + shift.1) * SCALE)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Unit cell on the left, its 3 x 3 tessellation on the right. Each panel's
/// material is a single `<path>`; cell outlines are polygons.
pub fn svg(mesh: &TriangularMesh, lattice: Lattice) -> String {
    let (a1, a2) = (lattice.to_physical(1.0, 0.0), lattice.to_physical(0.0, 1.0));
    let width_cell = (a1.0 + a2.0.max(0.0)) * SCALE;
    let height_cell = a2.1 * SCALE;
    let width = MARGIN * 3.0 + width_cell * 4.0;
    let height = MARGIN * 2.0 + height_cell * 3.0;

    let left = (MARGIN, MARGIN + height_cell * 2.0);
    let right = (MARGIN * 2.0 + width_cell, MARGIN + height_cell * 3.0);

    let mut cell = String::new();
    triangles_path(&mut cell, mesh, (0.0, 0.0), left);
    let mut tiled = String::new();
    for j in 0..3 {
        for i in 0..3 {
            let s = (i as f64 * a1.0 + j as f64 * a2.0, i as f64 * a1.1 + j as f64 * a2.1);
            triangles_path(&mut tiled, mesh, s, right);
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(out, r##"<path id="cell" fill="#1f4e79" stroke="none" d="{cell}"/>"##);
    let _ = writeln!(out, r##"<path id="tessellation" fill="#1f4e79" stroke="none" d="{tiled}"/>"##);
    let _ = writeln!(
        out,
        r##"<polygon fill="none" stroke="#c00000" stroke-width="1" points="{}"/>"##,
        cell_outline(lattice, (0.0, 0.0), left)
    );
    let _ = writeln!(
        out,
        r##"<polygon fill="none" stroke="#c00000" stroke-width="1" stroke-dasharray="4 3" points="{}"/>"##,
        cell_outline(lattice, (a1.0 + a2.0, a1.1 + a2.1), right)
    );
    out.push_str("</svg>\n");
    out
}

/// Object File Format with z = 0.
pub fn off(mesh: &TriangularMesh) -> String {
    let mut out = format!("OFF\n{} {} 0\n", mesh.vertices.len(), mesh.triangles.len());
    for &(x, y) in &mesh.vertices {
        let _ = writeln!(out, "{x:.17e} {y:.17e} 0");
    }
    for [a, b, c] in &mesh.triangles {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    out
}
