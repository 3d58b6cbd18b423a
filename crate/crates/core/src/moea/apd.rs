use alloc::vec::Vec;

use crate::math;

/// Ideal point (componentwise minimum) and objectives shifted by it.
pub fn translate_objectives<T: AsRef<[f64]>>(fitness: &[T]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let Some(first) = fitness.first() else { return (Vec::new(), Vec::new()) };
    let mut z = first.as_ref().to_vec();
    for f in fitness {
        for (zi, &fi) in z.iter_mut().zip(f.as_ref()) {
            *zi = zi.min(fi);
        }
    }
    let shifted = fitness.iter().map(|f| f.as_ref().iter().zip(&z).map(|(a, b)| a - b).collect()).collect();
    (shifted, z)
}

/// Angle penalized distance of a translated objective vector `f` to unit
/// reference vector `v`.
///
/// `phi = acos(f.v / |f|)`, `P = M (t/t_max)^alpha phi / gamma`,
/// `d = |f| (1 + P)`. A zero vector gets `phi = 0` and `d = 0`.
pub fn apd(f: &[f64], v: &[f64], gamma: f64, t: usize, t_max: usize, alpha: f64, m: usize) -> f64 {
    let norm = math::norm(f);
    if norm == 0.0 {
        return 0.0;
    }
    let phi = math::acos(math::dot(f, v) / norm);
    let progress = if t_max == 0 { 1.0 } else { t as f64 / t_max as f64 };
    let penalty = m as f64 * math::pow(progress, alpha) * phi / gamma;
    norm * (1.0 + penalty)
}
