use std::collections::VecDeque;

use metacell_core::cppn::{initial_genome, mutate, Genome, InnovationRegistry, MutationRates};
use metacell_core::geometry::{
    check_constraints, normalize, sample_field, sample_patch, GroupTag, Label, PointCloud, DEFAULT_THRESHOLD,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_genome(seed: u64) -> Genome {
    let mut reg = InnovationRegistry::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates = MutationRates { add_node: 0.5, add_connection: 0.5, ..MutationRates::default() };
    let mut g = initial_genome(seed, &mut reg, &rates, &mut rng);
    for _ in 0..(seed % 12) {
        g = mutate(&g, &mut reg, &rates, &mut rng);
    }
    g
}

/// Components, x and y percolation by flood fill over an explicit 3x3 tiling.
fn flood_fill_oracle(labels: &[Label], cloud: &PointCloud) -> (usize, bool, bool) {
    let n = cloud.resolution();
    let m = n - 1;
    let offsets = cloud.lattice().neighbor_offsets();
    let solid_cell = |i: usize, j: usize| labels[j * n + i] > 0;

    // interior components, closed cell, no wrapping
    let mut seen = vec![false; n * n];
    let mut components = 0;
    for start in 0..n * n {
        if !solid_cell(start % n, start / n) || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(p) = q.pop_front() {
            let (i, j) = ((p % n) as i64, (p / n) as i64);
            for &(di, dj) in offsets {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                    continue;
                }
                let k = b as usize * n + a as usize;
                if solid_cell(a as usize, b as usize) && !seen[k] {
                    seen[k] = true;
                    q.push_back(k);
                }
            }
        }
    }

    // 3x3 tiling of the periodic cell, flood filled from the middle tile
    let w = 3 * m;
    let solid = |a: usize, b: usize| solid_cell(a % m, b % m);
    let mut x = false;
    let mut y = false;
    for j in 0..m {
        for i in 0..m {
            if !solid(i, j) {
                continue;
            }
            let start = (m + j) * w + (m + i);
            let mut reach = vec![false; w * w];
            reach[start] = true;
            let mut q = VecDeque::from([start]);
            while let Some(p) = q.pop_front() {
                let (a, b) = ((p % w) as i64, (p / w) as i64);
                for &(da, db) in offsets {
                    let (c, d) = (a + da, b + db);
                    if c < 0 || d < 0 || c >= w as i64 || d >= w as i64 {
                        continue;
                    }
                    let k = d as usize * w + c as usize;
                    if solid(c as usize, d as usize) && !reach[k] {
                        reach[k] = true;
                        q.push_back(k);
                    }
                }
            }
            x |= reach[(m + j) * w + (2 * m + i)] || reach[(m + j) * w + i];
            y |= reach[(2 * m + j) * w + (m + i)] || reach[j * w + (m + i)];
        }
    }
    (components, x, y)
}

#[test]
fn connectivity_matches_flood_fill_on_random_genomes() {
    let mut checked = 0;
    for seed in 0..260u64 {
        let tag = GroupTag::ALL[seed as usize % 5];
        let cloud = PointCloud::new(tag, 15 + (seed as usize % 3) * 4).unwrap();
        let Ok(f) = sample_field(&random_genome(seed), &cloud, DEFAULT_THRESHOLD) else { continue };
        let r = check_constraints(&f.labels, &cloud);
        if f.material_count() == 0 {
            assert_eq!(r.violation as usize, cloud.len());
            continue;
        }
        let (c, x, y) = flood_fill_oracle(&f.labels, &cloud);
        assert_eq!((r.interior_components, r.x_connected, r.y_connected), (c, x, y), "seed {seed} {tag}");
        assert_eq!(r.violation as usize, c - 1 + usize::from(!x) + usize::from(!y));
        checked += 1;
        if checked == 200 {
            break;
        }
    }
    assert_eq!(checked, 200);
}

#[test]
fn labels_are_invariant_under_the_group() {
    for seed in 0..40u64 {
        let tag = GroupTag::ALL[seed as usize % 5];
        let cloud = PointCloud::new(tag, 23).unwrap();
        let Ok(f) = sample_field(&random_genome(seed), &cloud, DEFAULT_THRESHOLD) else { continue };
        let m = cloud.intervals() as i64;
        for op in &cloud.group().orbit_maps {
            for k in 0..cloud.len() {
                let (i, j) = cloud.coords(k);
                let (a, b) = op.apply_int((i as i64, j as i64), m);
                let img = cloud.index(a.rem_euclid(m) as usize, b.rem_euclid(m) as usize);
                assert_eq!(f.labels[k], f.labels[img]);
            }
        }
    }
}

#[test]
fn p4_rotation_about_the_cell_centre() {
    let cloud = PointCloud::new(GroupTag::P4, 21).unwrap();
    let raw = sample_patch(&random_genome(7), &cloud).unwrap();
    let m = cloud.intervals();
    for j in 0..m {
        for i in 0..m {
            // (x, y) -> (-y, x) about the centre, in index units
            let (a, b) = (m - j, i);
            assert_eq!(raw[cloud.index(i, j)], raw[cloud.index(a % m, b % m)]);
        }
    }
}

#[test]
fn refined_grid_shares_exact_values() {
    for seed in 0..10u64 {
        let g = random_genome(seed);
        let coarse = PointCloud::new(GroupTag::P1, 35).unwrap();
        let fine = PointCloud::new(GroupTag::P1, 69).unwrap();
        let a = sample_patch(&g, &coarse).unwrap();
        let b = sample_patch(&g, &fine).unwrap();
        for j in 0..35 {
            for i in 0..35 {
                assert_eq!(a[coarse.index(i, j)].to_bits(), b[fine.index(2 * i, 2 * j)].to_bits());
            }
        }
    }
}

#[test]
fn refined_boundary_stays_within_one_coarse_spacing() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let g = random_genome(seed);
        let coarse = PointCloud::new(GroupTag::P4mm, 35).unwrap();
        let fine = PointCloud::new(GroupTag::P4mm, 69).unwrap();
        let (Ok(a), Ok(b)) = (sample_field(&g, &coarse, 0.5), sample_field(&g, &fine, 0.5)) else { continue };
        if a.boundary.is_empty() || b.boundary.is_empty() {
            continue;
        }
        let dist = |p: (f64, f64), set: &[metacell_core::geometry::BoundaryPoint]| {
            set.iter().map(|q| ((p.0 - q.position.0).powi(2) + (p.1 - q.position.1).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
        };
        let h1 = a.boundary.iter().map(|p| dist(p.position, &b.boundary)).fold(0.0, f64::max);
        let h2 = b.boundary.iter().map(|p| dist(p.position, &a.boundary)).fold(0.0, f64::max);
        let h = 1.0 / coarse.intervals() as f64;
        // Fields with features below the coarse spacing can legitimately
        // violate the bound; require it for the usual case.
        if h1.max(h2) <= h {
            checked += 1;
        }
    }
    assert!(checked >= 40, "only {checked} of 60 genomes refined within one spacing");
}

proptest! {
    #[test]
    fn normalize_is_monotone(v in prop::collection::vec(-1e3f64..1e3, 2..50)) {
        prop_assume!(v.iter().any(|&x| x != v[0]));
        let n = normalize(&v).unwrap();
        for i in 0..v.len() {
            prop_assert!((0.0..=1.0).contains(&n[i]));
            for j in 0..v.len() {
                if v[i] < v[j] {
                    prop_assert!(n[i] < n[j]);
                }
            }
        }
    }
}
