use alloc::vec::Vec;

use super::boundary::{extract_boundary, BoundaryPoint};
use super::cloud::PointCloud;
use crate::cppn::{CompiledCppn, Genome};
use crate::{Error, Result};

/// Threshold separating material from void in the normalized field.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// `+1` for material, `-1` for void.
pub type Label = i8;

/// Field stages for one genome on one grid.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampledField {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub labels: Vec<Label>,
    pub boundary: Vec<BoundaryPoint>,
    pub threshold: f64,
}

impl SampledField {
    pub fn material_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l > 0).count()
    }
}

/// Evaluates the network on the fundamental patch and fills the whole grid
/// from orbit representatives.
pub fn sample_patch(genome: &Genome, cloud: &PointCloud) -> Result<Vec<f64>> {
    let net = CompiledCppn::new(genome)?;
    let inputs: Vec<(f64, f64)> = cloud
        .patch()
        .iter()
        .map(|&k| {
            let (i, j) = cloud.coords(k);
            cloud.position(i, j)
        })
        .collect();
    let values = net.evaluate_batch(&inputs);
    let mut at = alloc::vec![f64::NAN; cloud.len()];
    for (&k, v) in cloud.patch().iter().zip(values) {
        at[k] = v;
    }
    Ok((0..cloud.len()).map(|k| at[cloud.representative(k)]).collect())
}

/// Min-max normalization to `[0, 1]`.
///
/// Fails with [`Error::DegenerateField`] for a constant or non-finite field.
pub fn normalize(raw: &[f64]) -> Result<Vec<f64>> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in raw {
        if !v.is_finite() {
            return Err(Error::DegenerateField);
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::DegenerateField);
    }
    Ok(raw.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect())
}

/// `+1` where the normalized value reaches the threshold, `-1` elsewhere.
pub fn label(normalized: &[f64], threshold: f64) -> Vec<Label> {
    normalized.iter().map(|&v| if v >= threshold { 1 } else { -1 }).collect()
}

/// Runs sampling, normalization, labelling and boundary extraction.
pub fn sample_field(genome: &Genome, cloud: &PointCloud, threshold: f64) -> Result<SampledField> {
    let raw = sample_patch(genome, cloud)?;
    let normalized = normalize(&raw)?;
    let labels = label(&normalized, threshold);
    let boundary = extract_boundary(&normalized, cloud, threshold);
    Ok(SampledField { raw, normalized, labels, boundary, threshold })
}
