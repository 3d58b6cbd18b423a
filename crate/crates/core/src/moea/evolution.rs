use alloc::vec::Vec;

use rand::Rng;

use super::apd::translate_objectives;
use super::niche::ReproductionPlan;
use super::pareto::non_dominated;
use super::select::{assign, select, Candidate};
use super::vectors::{lattice_divisions, ReferenceVectorSet};
use crate::rng::{stream, Purpose, StreamRng};
use crate::{Error, Result};

/// Objective value given to every objective of a failed evaluation.
pub const FAILURE_SENTINEL: f64 = 1e9;

/// Settings of the evolutionary loop.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RveaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Exponent of the angle penalty.
    pub alpha: f64,
    /// Reference vectors are adapted every `ceil(adaptation_interval * max_generations)` generations.
    pub adaptation_interval: f64,
    /// Requested number of reference vectors; the population size if unset.
    pub reference_vectors: Option<usize>,
    pub objectives: usize,
    pub seed: u64,
}

impl Default for RveaConfig {
    fn default() -> Self {
        RveaConfig {
            population_size: 500,
            max_generations: 800,
            alpha: 2.0,
            adaptation_interval: 0.1,
            reference_vectors: None,
            objectives: 2,
            seed: 0,
        }
    }
}

impl RveaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.adaptation_interval > 0.0 && self.adaptation_interval <= 1.0) {
            return bad("adaptation_interval must lie in (0, 1]");
        }
        if self.objectives < 2 {
            return bad("at least two objectives are required");
        }
        if self.reference_vectors.is_some_and(|n| n < 2) {
            return bad("at least two reference vectors are required");
        }
        Ok(())
    }

    /// Generations between reference-vector adaptations.
    pub fn adaptation_period(&self) -> usize {
        let p = crate::math::ceil(self.adaptation_interval * self.max_generations as f64) as usize;
        p.max(1)
    }
}

/// One or two parents handed to [`Variation::offspring`].
#[derive(Debug, Clone, Copy)]
pub enum Parents<'a, G> {
    One(&'a G),
    Two(&'a G, &'a G),
}

/// Creates and varies genomes.
pub trait Variation {
    type Genome: Clone;

    fn random(&mut self, id: u64, rng: &mut StreamRng) -> Self::Genome;

    /// Crossover (for two parents) followed by mutation.
    fn offspring(&mut self, parents: Parents<'_, Self::Genome>, id: u64, rng: &mut StreamRng) -> Self::Genome;
}

/// Outcome of evaluating one genome. `fitness` is `None` when the
/// evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<D> {
    pub fitness: Option<Vec<f64>>,
    pub cv: f64,
    pub detail: D,
}

/// Evaluates genomes, possibly in parallel. Results must be in input order.
pub trait BatchEvaluator<G> {
    type Detail: Clone;

    fn evaluate_batch(&mut self, genomes: &[&G]) -> Vec<Evaluation<Self::Detail>>;
}

/// An evaluated member of the population.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual<G, D> {
    pub id: u64,
    pub genome: G,
    /// Objective vector, absent if the evaluation failed.
    pub fitness: Option<Vec<f64>>,
    /// The fitness, or the failure sentinel.
    pub objectives: Vec<f64>,
    pub cv: f64,
    pub detail: D,
    /// Generation in which the individual was created.
    pub generation: usize,
}

impl<G, D> Individual<G, D> {
    pub fn feasible(&self) -> bool {
        self.fitness.is_some() && self.cv == 0.0
    }
}

/// The evolutionary loop, advanced one generation at a time.
pub struct Evolution<V: Variation, E: BatchEvaluator<V::Genome>> {
    config: RveaConfig,
    variation: V,
    evaluator: E,
    vectors: ReferenceVectorSet,
    population: Vec<Individual<V::Genome, E::Detail>>,
    generation: usize,
    next_id: u64,
    initialized: bool,
}

impl<V: Variation, E: BatchEvaluator<V::Genome>> Evolution<V, E> {
    pub fn new(config: RveaConfig, variation: V, evaluator: E) -> Result<Self> {
        config.validate()?;
        let count = config.reference_vectors.unwrap_or(config.population_size);
        let h = lattice_divisions(config.objectives, count);
        let vectors = ReferenceVectorSet::simplex_lattice(config.objectives, h)?;
        Ok(Evolution {
            config,
            variation,
            evaluator,
            vectors,
            population: Vec::new(),
            generation: 0,
            next_id: 0,
            initialized: false,
        })
    }

    pub fn config(&self) -> &RveaConfig {
        &self.config
    }

    pub fn vectors(&self) -> &ReferenceVectorSet {
        &self.vectors
    }

    pub fn population(&self) -> &[Individual<V::Genome, E::Detail>] {
        &self.population
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn variation(&self) -> &V {
        &self.variation
    }

    pub fn evaluator(&self) -> &E {
        &self.evaluator
    }

    pub fn is_finished(&self) -> bool {
        self.initialized && self.generation >= self.config.max_generations
    }

    /// Feasible, non-dominated members of the current population.
    pub fn front(&self) -> Vec<&Individual<V::Genome, E::Detail>> {
        let feasible: Vec<&Individual<_, _>> = self.population.iter().filter(|i| i.feasible()).collect();
        let objs: Vec<&[f64]> = feasible.iter().map(|i| i.objectives.as_slice()).collect();
        non_dominated(&objs).into_iter().map(|k| feasible[k]).collect()
    }

    fn evaluate(&mut self, genomes: Vec<(u64, V::Genome)>, generation: usize) -> Vec<Individual<V::Genome, E::Detail>> {
        let refs: Vec<&V::Genome> = genomes.iter().map(|(_, g)| g).collect();
        let results = self.evaluator.evaluate_batch(&refs);
        assert_eq!(results.len(), genomes.len(), "evaluator returned a wrong number of results");
        let m = self.config.objectives;
        genomes
            .into_iter()
            .zip(results)
            .map(|((id, genome), ev)| {
                let fitness = ev.fitness.filter(|f| f.len() == m && f.iter().all(|x| x.is_finite()));
                let (objectives, cv) = match &fitness {
                    Some(f) => (f.clone(), ev.cv.max(0.0)),
                    None => (alloc::vec![FAILURE_SENTINEL; m], ev.cv.max(1.0)),
                };
                Individual { id, genome, fitness, objectives, cv, detail: ev.detail, generation }
            })
            .collect()
    }

    fn take_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Creates and evaluates the initial population.
    pub fn initialize(&mut self) -> &[Individual<V::Genome, E::Detail>] {
        let seed = self.config.seed;
        let genomes: Vec<(u64, V::Genome)> = (0..self.config.population_size)
            .map(|k| {
                let id = self.take_id();
                let mut rng = stream(seed, Purpose::Initialize, 0, k as u64);
                (id, self.variation.random(id, &mut rng))
            })
            .collect();
        self.population = self.evaluate(genomes, 0);
        self.generation = 0;
        self.initialized = true;
        &self.population
    }

    /// Reproduction, evaluation, selection and (periodically) adaptation.
    /// Returns the newly evaluated offspring.
    pub fn step(&mut self) -> Result<Vec<Individual<V::Genome, E::Detail>>> {
        if !self.initialized {
            self.initialize();
        }
        if self.population.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let t = self.generation;
        let t_max = self.config.max_generations;
        let seed = self.config.seed;

        let objs: Vec<&[f64]> = self.population.iter().map(|i| i.objectives.as_slice()).collect();
        let (translated, _) = translate_objectives(&objs);
        let assignment = assign(&translated, &self.vectors);
        let count = self.config.population_size;
        let plan = ReproductionPlan::new(&assignment, &self.vectors, count, t, t_max);
        let everyone: Vec<usize> = (0..self.population.len()).collect();

        let mut genomes = Vec::with_capacity(count);
        for k in 0..count {
            let pool: &[usize] = match plan.local.get(k) {
                Some(&niche) => &plan.niches[niche].members,
                None => &everyone,
            };
            let mut rng = stream(seed, Purpose::Reproduce, t as u64, k as u64);
            let id = self.take_id();
            let child = if pool.len() >= 2 {
                let a = rng.random_range(0..pool.len());
                let mut b = rng.random_range(0..pool.len() - 1);
                if b >= a {
                    b += 1;
                }
                let (pa, pb) = (&self.population[pool[a]].genome, &self.population[pool[b]].genome);
                self.variation.offspring(Parents::Two(pa, pb), id, &mut rng)
            } else {
                let p = &self.population[pool[0]].genome;
                self.variation.offspring(Parents::One(p), id, &mut rng)
            };
            genomes.push((id, child));
        }
        let offspring = self.evaluate(genomes, t + 1);

        let mut union = core::mem::take(&mut self.population);
        union.extend(offspring.iter().cloned());
        let candidates: Vec<Candidate<'_>> =
            union.iter().map(|i| Candidate { objectives: &i.objectives, cv: i.cv }).collect();
        let chosen = select(&candidates, &self.vectors, t, t_max, self.config.alpha)?;
        let mut slots: Vec<Option<Individual<_, _>>> = union.into_iter().map(Some).collect();
        self.population = chosen.into_iter().map(|i| slots[i].take().expect("selected once")).collect();

        self.generation = t + 1;
        if self.generation % self.config.adaptation_period() == 0 {
            self.adapt();
        }
        Ok(offspring)
    }

    fn adapt(&mut self) {
        let m = self.config.objectives;
        let mut lo = alloc::vec![f64::INFINITY; m];
        let mut hi = alloc::vec![f64::NEG_INFINITY; m];
        let mut any = false;
        for ind in self.population.iter().filter(|i| i.feasible()) {
            any = true;
            for (k, &v) in ind.objectives.iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        if any {
            self.vectors.adapt(&lo, &hi);
        }
    }

    /// Runs to `max_generations`, reporting every batch of newly evaluated
    /// individuals with its generation.
    pub fn run<F>(&mut self, mut on_evaluated: F) -> Result<()>
    where
        F: FnMut(usize, &[Individual<V::Genome, E::Detail>]),
    {
        if !self.initialized {
            self.initialize();
            on_evaluated(0, &self.population);
        }
        while self.generation < self.config.max_generations {
            let born = self.step()?;
            on_evaluated(self.generation, &born);
        }
        Ok(())
    }
}
