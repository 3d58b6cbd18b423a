//! Rebuilding designs from archived genomes.

use metacell_core::design::{DesignProblem, DesignReport, FailureKind};
use metacell_core::geometry::{
    build_mesh, check_constraints, sample_field, ConstraintReport, PointCloud, SampledField, TriangularMesh,
};
use metacell_core::moea::Evaluation;

use crate::archive::ArchiveRecord;
use crate::{Error, Result};

/// Geometry of a reconstructed design.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub cloud: PointCloud,
    pub field: SampledField,
    pub constraint: ConstraintReport,
    pub mesh: TriangularMesh,
}

fn cloud(record: &ArchiveRecord, resolution: Option<usize>) -> Result<PointCloud> {
    Ok(PointCloud::new(record.symmetry, resolution.unwrap_or(record.resolution))?)
}

/// Sampled field of the archived genome, at the recorded resolution unless
/// another one is given.
pub fn reconstruct_field(record: &ArchiveRecord, resolution: Option<usize>) -> Result<(PointCloud, SampledField)> {
    let cloud = cloud(record, resolution)?;
    let field = sample_field(&record.genome()?, &cloud, record.threshold)?;
    Ok((cloud, field))
}

/// Field, constraint report and mesh. Designs that failed at run time fail
/// here with the same [`FailureKind`].
pub fn reconstruct(record: &ArchiveRecord, resolution: Option<usize>) -> Result<Reconstruction> {
    let design = |e: &metacell_core::Error| Error::Design(FailureKind::of(e));
    let (cloud, field) = reconstruct_field(record, resolution).map_err(|e| match e {
        Error::Core(c) => design(&c),
        other => other,
    })?;
    let constraint = check_constraints(&field.labels, &cloud);
    if field.material_count() == 0 {
        return Err(Error::Design(FailureKind::EmptyDesign));
    }
    if !constraint.feasible() {
        return Err(Error::Design(FailureKind::Disconnected));
    }
    let mesh = build_mesh(&field, &cloud).map_err(|e| design(&e))?;
    Ok(Reconstruction { cloud, field, constraint, mesh })
}

/// Re-runs the full evaluation of the archived genome.
pub fn reevaluate(record: &ArchiveRecord, resolution: Option<usize>) -> Result<Evaluation<DesignReport>> {
    let problem = DesignProblem::new(
        record.symmetry,
        resolution.unwrap_or(record.resolution),
        record.material,
        record.objectives.clone(),
    )?;
    let problem = DesignProblem { threshold: record.threshold, ..problem };
    Ok(problem.evaluate(&record.genome()?))
}
