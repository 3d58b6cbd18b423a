use metacell_core::geometry::{build_mesh, check_constraints, extract_boundary, label, GroupTag, PointCloud, SampledField, TriangularMesh};
use metacell_core::homogenization::{homogenize, homogenized_stiffness, BaseMaterial};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(cloud: &PointCloud, f: impl Fn(f64, f64) -> f64) -> SampledField {
    let normalized: Vec<f64> = (0..cloud.len())
        .map(|k| {
            let (i, j) = cloud.coords(cloud.representative(k));
            let (x, y) = cloud.position(i, j);
            f(x, y)
        })
        .collect();
    let labels = label(&normalized, 0.5);
    let boundary = extract_boundary(&normalized, cloud, 0.5);
    SampledField { raw: normalized.clone(), normalized, labels, boundary, threshold: 0.5 }
}

fn mesh(tag: GroupTag, n: usize, f: impl Fn(f64, f64) -> f64) -> (SampledField, TriangularMesh, PointCloud) {
    let cloud = PointCloud::new(tag, n).unwrap();
    let fl = field(&cloud, f);
    let m = build_mesh(&fl, &cloud).unwrap();
    (fl, m, cloud)
}

/// Area and strain-displacement matrix from the inverse of the barycentric
/// coordinate map.
fn oracle_b(p: [(f64, f64); 3]) -> (f64, DMatrix<f64>) {
    let m = DMatrix::from_fn(3, 3, |r, c| match c {
        0 => 1.0,
        1 => p[r].0,
        _ => p[r].1,
    });
    let area = 0.5 * m.determinant();
    let g = m.try_inverse().unwrap();
    let mut b = DMatrix::zeros(3, 6);
    for k in 0..3 {
        let (dx, dy) = (g[(1, k)], g[(2, k)]);
        b[(0, 2 * k)] = dx;
        b[(1, 2 * k + 1)] = dy;
        b[(2, 2 * k)] = dy;
        b[(2, 2 * k + 1)] = dx;
    }
    (area, b)
}

/// Full assembly with an explicit periodic constraint matrix, a dense LU
/// solve and stress averaging.
fn dense_oracle(mesh: &TriangularMesh, mat: &BaseMaterial) -> [[f64; 3]; 3] {
    let nv = mesh.vertices.len();
    let d = mat.stiffness();
    let mut rep: Vec<usize> = (0..nv).collect();
    for &(s, m) in &mesh.periodic_pairs {
        rep[s] = m;
    }
    let pinned = mesh.periodic_pairs.iter().map(|p| p.1).min().unwrap_or(0);
    let free: Vec<usize> = (0..nv).filter(|&v| rep[v] == v && v != pinned).collect();
    let col = |v: usize| free.iter().position(|&f| f == rep[v]);
    let mut t = DMatrix::<f64>::zeros(2 * nv, 2 * free.len());
    for v in 0..nv {
        if let Some(c) = col(v) {
            t[(2 * v, 2 * c)] = 1.0;
            t[(2 * v + 1, 2 * c + 1)] = 1.0;
        }
    }
    let mut k = DMatrix::<f64>::zeros(2 * nv, 2 * nv);
    let mut f = DMatrix::<f64>::zeros(2 * nv, 3);
    for tri in &mesh.triangles {
        let (area, b) = oracle_b(tri.map(|v| mesh.vertices[v]));
        let dm = DMatrix::from_fn(3, 3, |r, c| d[r][c]);
        let ke = b.transpose() * &dm * &b * area;
        let fe = -(b.transpose() * &dm) * area;
        for a in 0..6 {
            let ga = 2 * tri[a / 2] + a % 2;
            for c in 0..6 {
                k[(ga, 2 * tri[c / 2] + c % 2)] += ke[(a, c)];
            }
            for j in 0..3 {
                f[(ga, j)] += fe[(a, j)];
            }
        }
    }
    let kr = t.transpose() * &k * &t;
    let fr = t.transpose() * &f;
    let ur = kr.lu().solve(&fr).expect("oracle solve");
    let u = &t * ur;
    let mut c = [[0.0; 3]; 3];
    for tri in &mesh.triangles {
        let (area, b) = oracle_b(tri.map(|v| mesh.vertices[v]));
        for j in 0..3 {
            let ue: Vec<f64> = (0..6).map(|a| u[(2 * tri[a / 2] + a % 2, j)]).collect();
            let mut eps = [0.0; 3];
            eps[j] = 1.0;
            for r in 0..3 {
                eps[r] += (0..6).map(|a| b[(r, a)] * ue[a]).sum::<f64>();
            }
            for i in 0..3 {
                c[i][j] += area * (0..3).map(|q| d[i][q] * eps[q]).sum::<f64>() / mesh.cell_area;
            }
        }
    }
    c
}

fn norm(c: &[[f64; 3]; 3]) -> f64 {
    c.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn fully_material_cell_is_the_base_material() {
    for tag in [GroupTag::P1, GroupTag::P4mm, GroupTag::P31m] {
        let (_, m, _) = mesh(tag, 11, |_, _| 1.0);
        let t = homogenize(&m, &BaseMaterial::default()).unwrap();
        let d = BaseMaterial::default().stiffness();
        for i in 0..3 {
            for j in 0..3 {
                assert!((t.c[i][j] - d[i][j]).abs() < 1e-8 * norm(&d), "{tag}: C{i}{j} = {}", t.c[i][j]);
            }
        }
        assert!((t.e_avg - 1.0).abs() < 1e-8 && (t.nu_avg - 0.3).abs() < 1e-8);
    }
}

#[test]
fn stiffness_scales_with_base_modulus() {
    let (_, m, _) = mesh(GroupTag::P4, 21, |x, y| (2.0 * std::f64::consts::PI * x).sin() * (2.0 * std::f64::consts::PI * y).cos() * 0.5 + 0.6);
    let a = homogenized_stiffness(&m, &BaseMaterial::new(1.0, 0.3).unwrap()).unwrap();
    let b = homogenized_stiffness(&m, &BaseMaterial::new(3.5, 0.3).unwrap()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((b[i][j] - 3.5 * a[i][j]).abs() < 1e-9 * norm(&b));
        }
    }
}

#[test]
fn void_laminate_carries_its_volume_fraction_along_the_layer() {
    // Material band 1/4 <= y <= 3/4 spanning x. The band is free to contract
    // across its thickness, so the stiffness along it is phi * E.
    let (_, m, _) = mesh(GroupTag::P1, 35, |_, y| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * y).cos());
    let c = homogenized_stiffness(&m, &BaseMaterial::default()).unwrap();
    assert!((m.volume_fraction() - 0.5).abs() < 1e-3);
    assert!((c[0][0] - 0.5).abs() < 0.01 * 0.5, "C11 = {}", c[0][0]);
    assert!(c[1][1].abs() < 1e-6 && c[0][1].abs() < 1e-6);
}

#[test]
fn matches_dense_oracle_on_random_small_meshes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tested = 0;
    while tested < 10 {
        let terms: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0..3) as f64, rng.random_range(0..3) as f64))
            .collect();
        let tag = [GroupTag::P1, GroupTag::P2mm, GroupTag::P31m][tested % 3];
        let cloud = PointCloud::new(tag, 9).unwrap();
        let f = field(&cloud, |x, y| {
            let tau = 2.0 * std::f64::consts::PI;
            let v: f64 = terms.iter().map(|&(a, b, p, q)| a * (tau * (p * x + q * y)).cos() + b * (tau * (q * x - p * y)).sin()).sum();
            0.5 + 0.25 * v + 0.3
        });
        if !check_constraints(&f.labels, &cloud).feasible() {
            continue;
        }
        let Ok(m) = build_mesh(&f, &cloud) else { continue };
        if m.vertices.len() > 200 {
            continue;
        }
        let Ok(c) = homogenized_stiffness(&m, &BaseMaterial::default()) else { continue };
        let o = dense_oracle(&m, &BaseMaterial::default());
        for i in 0..3 {
            for j in 0..3 {
                assert!((c[i][j] - o[i][j]).abs() <= 1e-6 * norm(&o), "{tag}: C{i}{j} {} vs {}", c[i][j], o[i][j]);
            }
        }
        tested += 1;
    }
}

#[test]
fn p4mm_designs_are_tetragonal() {
    let (_, m, _) = mesh(GroupTag::P4mm, 35, |x, y| {
        let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
        0.3 + r + 0.2 * (8.0 * x * y).sin()
    });
    let t = homogenize(&m, &BaseMaterial::default()).unwrap();
    let n = t.norm();
    assert!((t.c[0][0] - t.c[1][1]).abs() < 1e-6 * n);
    assert!(t.c[0][2].abs() < 1e-6 * n && t.c[1][2].abs() < 1e-6 * n);
}

#[test]
fn hinge_through_a_single_vertex_fails_or_stays_bounded() {
    // Checkerboard: squares touching only at corners.
    let (_, m, _) = mesh(GroupTag::P2mm, 21, |x, y| {
        let s = |t: f64| if t < 0.5 { 1.0 } else { -1.0 };
        0.5 + 0.4 * s(x) * s(y)
    });
    if let Ok(c) = homogenized_stiffness(&m, &BaseMaterial::default()) {
        assert!(c.iter().flatten().all(|v| v.is_finite()));
    }
}
