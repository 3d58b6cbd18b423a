use alloc::vec::Vec;

/// `a` Pareto-dominates `b` (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strictly |= x < y;
    }
    strictly
}

/// Indices of the non-dominated points, in input order. Duplicates of a
/// non-dominated point are all kept.
pub fn non_dominated<T: AsRef<[f64]>>(points: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a].as_ref(), points[b].as_ref());
        pa.iter().zip(pb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
    });
    // In lexicographic order no point can dominate an earlier one.
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let p = points[i].as_ref();
        if !front.iter().any(|&j| dominates(points[j].as_ref(), p)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

/// Volume dominated by `points` and bounded by `reference` (minimization).
/// Points that do not strictly dominate the reference contribute nothing.
pub fn hypervolume<T: AsRef<[f64]>>(points: &[T], reference: &[f64]) -> f64 {
    let pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.as_ref().to_vec())
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .collect();
    hv(pts, reference)
}

fn hv(mut pts: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let m = reference.len();
    if pts.is_empty() {
        return 0.0;
    }
    if m == 1 {
        return reference[0] - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    }
    if m == 2 {
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut volume = 0.0;
        let mut ceiling = reference[1];
        for p in &pts {
            if p[1] < ceiling {
                volume += (reference[0] - p[0]) * (ceiling - p[1]);
                ceiling = p[1];
            }
        }
        return volume;
    }
    // Slice along the last objective.
    pts.sort_by(|a, b| a[m - 1].total_cmp(&b[m - 1]));
    let mut volume = 0.0;
    for k in 0..pts.len() {
        let upper = if k + 1 < pts.len() { pts[k + 1][m - 1] } else { reference[m - 1] };
        let depth = upper - pts[k][m - 1];
        if depth <= 0.0 {
            continue;
        }
        let slice: Vec<Vec<f64>> = pts[..=k].iter().map(|p| p[..m - 1].to_vec()).collect();
        volume += depth * hv(slice, &reference[..m - 1]);
    }
    volume
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance() {
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0]));
    }

    #[test]
    fn front_of_small_set() {
        let p = [[1.0, 5.0], [2.0, 2.0], [3.0, 3.0], [5.0, 1.0], [2.0, 2.0]];
        assert_eq!(non_dominated(&p), alloc::vec![0, 1, 3, 4]);
    }

    #[test]
    fn hypervolume_2d_staircase() {
        let hv = hypervolume(&[[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]], &[4.0, 4.0]);
        assert!((hv - 6.0).abs() < 1e-12);
        assert_eq!(hypervolume(&[[5.0, 0.0]], &[4.0, 4.0]), 0.0);
    }

    #[test]
    fn hypervolume_3d_matches_box_union() {
        let hv = hypervolume(&[[0.0, 0.0, 1.0], [1.0, 1.0, 0.0]], &[2.0, 2.0, 2.0]);
        // boxes of volume 4 and 2 overlapping in 1
        assert!((hv - 5.0).abs() < 1e-12);
    }
}
