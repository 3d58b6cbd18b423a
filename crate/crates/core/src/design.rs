//! Genome to evaluated design, and the CPPN variation operator.

use alloc::vec::Vec;

use crate::cppn::{crossover, initial_genome, mutate, Genome, InnovationRegistry, MutationRates};
use crate::geometry::{
    build_mesh, check_constraints, sample_field, ConstraintReport, GroupTag, PointCloud, SampledField, TriangularMesh,
    DEFAULT_THRESHOLD,
};
use crate::homogenization::{fitness_vector, homogenize, BaseMaterial, ElasticTensor, Objective};
use crate::moea::{BatchEvaluator, Evaluation, Parents, Variation};
use crate::rng::StreamRng;
use crate::{Error, Result};

/// Why a design has no fitness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FailureKind {
    InvalidGenome,
    DegenerateField,
    EmptyDesign,
    /// Material is not one periodic network; the violation is recorded.
    Disconnected,
    Meshing,
    SingularSystem,
    DegenerateTensor,
}

impl FailureKind {
    pub fn of(error: &Error) -> Self {
        match error {
            Error::DegenerateField => FailureKind::DegenerateField,
            Error::EmptyDesign => FailureKind::EmptyDesign,
            Error::Meshing(_) => FailureKind::Meshing,
            Error::SingularSystem { .. } => FailureKind::SingularSystem,
            Error::DegenerateTensor(_) => FailureKind::DegenerateTensor,
            _ => FailureKind::InvalidGenome,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FailureKind::InvalidGenome => "invalid_genome",
            FailureKind::DegenerateField => "degenerate_field",
            FailureKind::EmptyDesign => "empty_design",
            FailureKind::Disconnected => "disconnected",
            FailureKind::Meshing => "meshing",
            FailureKind::SingularSystem => "singular_system",
            FailureKind::DegenerateTensor => "degenerate_tensor",
        }
    }
}

/// Everything learned while evaluating one design.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignReport {
    pub constraint: Option<ConstraintReport>,
    pub tensor: Option<ElasticTensor>,
    pub volume_fraction: Option<f64>,
    pub failure: Option<FailureKind>,
}

/// Field, constraint check and (for connected designs) mesh of a genome.
#[derive(Debug, Clone)]
pub struct Phenotype {
    pub field: SampledField,
    pub constraint: ConstraintReport,
    pub mesh: Option<TriangularMesh>,
}

/// A symmetry group, grid, base material and objective list.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub cloud: PointCloud,
    pub material: BaseMaterial,
    pub objectives: Vec<Objective>,
    pub threshold: f64,
}

impl DesignProblem {
    pub fn new(group: GroupTag, resolution: usize, material: BaseMaterial, objectives: Vec<Objective>) -> Result<Self> {
        material.validate()?;
        Ok(DesignProblem { cloud: PointCloud::new(group, resolution)?, material, objectives, threshold: DEFAULT_THRESHOLD })
    }

    /// Violation assigned to designs without a usable field.
    pub fn max_violation(&self) -> f64 {
        self.cloud.len() as f64
    }

    /// Geometry only. The mesh is built when the design is connected.
    pub fn phenotype(&self, genome: &Genome) -> Result<Phenotype> {
        let field = sample_field(genome, &self.cloud, self.threshold)?;
        let constraint = check_constraints(&field.labels, &self.cloud);
        let mesh = if constraint.feasible() { Some(build_mesh(&field, &self.cloud)?) } else { None };
        Ok(Phenotype { field, constraint, mesh })
    }

    /// Full pipeline. Never fails; problems are reported as an infeasible
    /// evaluation.
    pub fn evaluate(&self, genome: &Genome) -> Evaluation<DesignReport> {
        let fail = |cv: f64, constraint: Option<ConstraintReport>, kind: FailureKind| Evaluation {
            fitness: None,
            cv,
            detail: DesignReport { constraint, tensor: None, volume_fraction: None, failure: Some(kind) },
        };
        let field = match sample_field(genome, &self.cloud, self.threshold) {
            Ok(f) => f,
            Err(e) => return fail(self.max_violation(), None, FailureKind::of(&e)),
        };
        let report = check_constraints(&field.labels, &self.cloud);
        if field.material_count() == 0 {
            return fail(report.violation as f64, Some(report), FailureKind::EmptyDesign);
        }
        if !report.feasible() {
            return fail(report.violation as f64, Some(report), FailureKind::Disconnected);
        }
        let mesh = match build_mesh(&field, &self.cloud) {
            Ok(m) => m,
            Err(e) => return fail(1.0, Some(report), FailureKind::of(&e)),
        };
        let volume_fraction = mesh.volume_fraction();
        match homogenize(&mesh, &self.material) {
            Ok(tensor) => Evaluation {
                fitness: Some(fitness_vector(&tensor, &self.objectives)),
                cv: 0.0,
                detail: DesignReport {
                    constraint: Some(report),
                    tensor: Some(tensor),
                    volume_fraction: Some(volume_fraction),
                    failure: None,
                },
            },
            Err(e) => {
                let mut ev = fail(1.0, Some(report), FailureKind::of(&e));
                ev.detail.volume_fraction = Some(volume_fraction);
                ev
            }
        }
    }
}

impl BatchEvaluator<Genome> for DesignProblem {
    type Detail = DesignReport;

    fn evaluate_batch(&mut self, genomes: &[&Genome]) -> Vec<Evaluation<DesignReport>> {
        genomes.iter().map(|g| self.evaluate(g)).collect()
    }
}

/// NEAT crossover followed by mutation, sharing one innovation registry.
#[derive(Debug, Clone, Default)]
pub struct CppnVariation {
    pub registry: InnovationRegistry,
    pub rates: MutationRates,
}

impl CppnVariation {
    pub fn new(rates: MutationRates) -> Self {
        CppnVariation { registry: InnovationRegistry::new(), rates }
    }
}

impl Variation for CppnVariation {
    type Genome = Genome;

    fn random(&mut self, id: u64, rng: &mut StreamRng) -> Genome {
        initial_genome(id, &mut self.registry, &self.rates, rng)
    }

    fn offspring(&mut self, parents: Parents<'_, Genome>, id: u64, rng: &mut StreamRng) -> Genome {
        let child = match parents {
            Parents::One(p) => p.clone().with_id(id),
            Parents::Two(a, b) => crossover(a, b, id, rng),
        };
        mutate(&child, &mut self.registry, &self.rates, rng).with_id(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cppn::{Activation, ConnectionGene, Marker, NodeGene, INPUT_X, INPUT_Y, OUTPUT};
    use crate::homogenization::Property;
    use crate::rng::{stream, Purpose};

    fn genome(out: Activation, wx: f64, wy: f64, bias: f64) -> Genome {
        Genome::new(
            0,
            alloc::vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(out, bias)],
            alloc::vec![ConnectionGene::new(Marker(3), INPUT_X, OUTPUT, wx), ConnectionGene::new(Marker(4), INPUT_Y, OUTPUT, wy)],
        )
        .unwrap()
    }

    fn problem(tag: GroupTag) -> DesignProblem {
        let obj = alloc::vec![Objective::maximize(Property::E), Objective::minimize(Property::Nu)];
        DesignProblem::new(tag, 21, BaseMaterial::default(), obj).unwrap()
    }

    #[test]
    fn constant_field_is_maximally_infeasible() {
        let p = problem(GroupTag::P1);
        let ev = p.evaluate(&genome(Activation::Linear, 0.0, 0.0, 1.0));
        assert!(ev.fitness.is_none());
        assert_eq!(ev.cv, p.max_violation());
        assert_eq!(ev.detail.failure, Some(FailureKind::DegenerateField));
    }

    #[test]
    fn laminate_is_disconnected_across_layers() {
        let ev = problem(GroupTag::P1).evaluate(&genome(Activation::Linear, 1.0, 0.0, 0.0));
        assert_eq!(ev.cv, 1.0);
        assert_eq!(ev.detail.failure, Some(FailureKind::Disconnected));
    }

    #[test]
    fn connected_design_gets_fitness() {
        // Gaussian of a ramp in x + y gives a symmetric band network under p4mm.
        let ev = problem(GroupTag::P4mm).evaluate(&genome(Activation::Sine, 6.0, 6.0, 0.3));
        if let Some(f) = &ev.fitness {
            let t = ev.detail.tensor.unwrap();
            assert_eq!(f, &alloc::vec![-t.e_avg, t.nu_avg]);
            assert_eq!(ev.cv, 0.0);
        } else {
            assert!(ev.cv >= 1.0);
        }
    }

    #[test]
    fn variation_keeps_ids_and_validity() {
        let mut v = CppnVariation::default();
        let mut rng = stream(1, Purpose::Initialize, 0, 0);
        let a = v.random(10, &mut rng);
        let b = v.random(11, &mut rng);
        let c = v.offspring(Parents::Two(&a, &b), 12, &mut rng);
        let d = v.offspring(Parents::One(&c), 13, &mut rng);
        assert_eq!((a.id(), c.id(), d.id()), (10, 12, 13));
        c.validate().unwrap();
        d.validate().unwrap();
    }
}
