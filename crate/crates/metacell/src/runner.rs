//! Runs an experiment: evolution, archiving, logging and the manifest.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use metacell_core::cppn::Genome;
use metacell_core::design::{CppnVariation, DesignProblem, DesignReport};
use metacell_core::moea::{BatchEvaluator, Evaluation, Evolution, Individual};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::{ArchiveReader, ArchiveRecord, ArchiveWriter};
use crate::config::RunConfig;
use crate::export::write_fronts;
use crate::genome_io::GenomeRecord;
use crate::{Error, Result};

pub const ARCHIVE_FILE: &str = "archive.mca";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GENERATIONS_FILE: &str = "generations.csv";
/// Created next to an archive whose run was aborted.
pub const PARTIAL_MARKER: &str = "archive.mca.partial";
const APPEND_ATTEMPTS: usize = 3;

/// Evaluates a batch on a dedicated thread pool. Results do not depend on
/// the number of threads.
pub struct ParallelEvaluator {
    pub problem: DesignProblem,
    pool: rayon::ThreadPool,
}

impl ParallelEvaluator {
    /// `threads = 0` uses every available core.
    pub fn new(problem: DesignProblem, threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Core(metacell_core::Error::Config(e.to_string())))?;
        Ok(ParallelEvaluator { problem, pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl BatchEvaluator<Genome> for ParallelEvaluator {
    type Detail = DesignReport;

    fn evaluate_batch(&mut self, genomes: &[&Genome]) -> Vec<Evaluation<DesignReport>> {
        let problem = &self.problem;
        self.pool.install(|| genomes.par_iter().map(|g| problem.evaluate(g)).collect())
    }
}

/// One row of the per-generation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub evaluated: usize,
    pub feasible: usize,
    pub front_size: usize,
    /// Best property value per objective among feasible survivors.
    pub best: Vec<Option<f64>>,
    pub mean_cv: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state", content = "reason")]
pub enum RunStatus {
    Completed,
    Aborted(String),
}

/// Written atomically when a run ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub seed: u64,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub status: RunStatus,
    pub archive: PathBuf,
    pub records: usize,
    pub fronts: Vec<PathBuf>,
    pub generations: Vec<GenerationSummary>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Evaluation threads, 0 for all cores.
    pub threads: usize,
    /// Replace an existing archive.
    pub force: bool,
}

/// Output of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub dir: PathBuf,
}

type Member = Individual<Genome, DesignReport>;

fn to_record(config: &RunConfig, resolution: usize, ind: &Member) -> ArchiveRecord {
    let mut r = ArchiveRecord {
        run_id: config.run_id.clone(),
        generation: ind.generation as u64,
        id: ind.id,
        genome: GenomeRecord::from(&ind.genome),
        symmetry: config.symmetry,
        resolution,
        threshold: config.threshold,
        material: config.material,
        objectives: config.objectives.clone(),
        cv: ind.cv,
        fitness: ind.fitness.clone(),
        tensor: None,
        volume_fraction: None,
        failure: None,
    };
    r.set_detail(&ind.detail);
    r
}

fn append_all(writer: &mut ArchiveWriter, records: &[ArchiveRecord]) -> Result<()> {
    for r in records {
        let mut attempt = 1;
        loop {
            match writer.append(r) {
                Ok(()) => break,
                Err(Error::Io { path, source }) if attempt < APPEND_ATTEMPTS => {
                    log::warn!("append to {} failed ({source}), retrying", path.display());
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    writer.sync()
}

fn summarize(generation: usize, evaluated: usize, population: &[Member], objectives: usize, seconds: f64) -> GenerationSummary {
    let feasible: Vec<&Member> = population.iter().filter(|i| i.feasible()).collect();
    let objs: Vec<&[f64]> = feasible.iter().map(|i| i.objectives.as_slice()).collect();
    let best = (0..objectives)
        .map(|k| feasible.iter().map(|i| i.objectives[k]).min_by(f64::total_cmp))
        .collect();
    GenerationSummary {
        generation,
        evaluated,
        feasible: feasible.len(),
        front_size: metacell_core::moea::non_dominated(&objs).len(),
        best,
        mean_cv: population.iter().map(|i| i.cv).sum::<f64>() / population.len().max(1) as f64,
        seconds,
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(Error::io(&tmp))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(Error::io(&tmp))?;
    fs::rename(&tmp, path).map_err(Error::io(path))
}

/// Runs `config` into `dir`: `archive.mca` (+ index), `generations.csv`,
/// one front CSV per objective list and `manifest.json`.
pub fn run(config: &RunConfig, dir: &Path, options: &RunOptions) -> Result<RunOutcome> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let archive_path = dir.join(ARCHIVE_FILE);
    let mut writer = ArchiveWriter::create(&archive_path, options.force)?;
    let _ = fs::remove_file(dir.join(PARTIAL_MARKER));
    let started = chrono::Utc::now().to_rfc3339();

    let problem = DesignProblem::new(config.symmetry, config.resolution, config.material, config.objectives.clone())?;
    let problem = DesignProblem { threshold: config.threshold, ..problem };
    let resolution = problem.cloud.resolution();
    let evaluator = ParallelEvaluator::new(problem, options.threads)?;
    let threads = evaluator.threads();
    let mut evolution = Evolution::new(config.evolution.clone(), CppnVariation::new(config.mutation.clone()), evaluator)?;

    let log_path = dir.join(GENERATIONS_FILE);
    let mut log_file = csv::Writer::from_path(&log_path)?;
    let mut header = vec!["generation", "evaluated", "feasible", "front_size", "mean_cv", "seconds"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend(config.objectives.iter().map(|o| format!("best {}", o.label())));
    log_file.write_record(&header)?;

    let m = config.objectives.len();
    let mut generations = Vec::new();
    let clock = Instant::now();
    let mut outcome: Result<()> = Ok(());
    let mut born: Vec<Member> = evolution.initialize().to_vec();
    loop {
        let records: Vec<ArchiveRecord> = born.iter().map(|i| to_record(config, resolution, i)).collect();
        if let Err(e) = append_all(&mut writer, &records) {
            outcome = Err(e);
            break;
        }
        let s = summarize(evolution.generation(), born.len(), evolution.population(), m, clock.elapsed().as_secs_f64());
        let best: Vec<String> = s
            .best
            .iter()
            .zip(&config.objectives)
            .map(|(b, o)| b.map(|v| format!("{:?}", o.property_value(v))).unwrap_or_default())
            .collect();
        log::info!(
            "generation {:>4}: front {:>3}, feasible {:>3}/{}, best [{}], mean cv {:.3}, {:.1}s",
            s.generation,
            s.front_size,
            s.feasible,
            evolution.population().len(),
            best.join(", "),
            s.mean_cv,
            s.seconds
        );
        let mut row = vec![
            s.generation.to_string(),
            s.evaluated.to_string(),
            s.feasible.to_string(),
            s.front_size.to_string(),
            format!("{:?}", s.mean_cv),
            format!("{:.3}", s.seconds),
        ];
        row.extend(best);
        log_file.write_record(&row)?;
        log_file.flush().map_err(Error::io(&log_path))?;
        generations.push(s);
        if evolution.is_finished() {
            break;
        }
        match evolution.step() {
            Ok(b) => born = b,
            Err(e) => {
                outcome = Err(e.into());
                break;
            }
        }
    }

    let mut manifest = RunManifest {
        config: config.clone(),
        seed: config.evolution.seed,
        threads,
        started,
        finished: String::new(),
        status: RunStatus::Completed,
        archive: PathBuf::from(ARCHIVE_FILE),
        records: writer.len(),
        fronts: Vec::new(),
        generations,
    };
    if let Err(e) = outcome {
        let _ = writer.sync();
        let _ = fs::write(dir.join(PARTIAL_MARKER), format!("{e}\n"));
        manifest.status = RunStatus::Aborted(e.to_string());
        manifest.finished = chrono::Utc::now().to_rfc3339();
        write_atomically(&dir.join(MANIFEST_FILE), &serde_json::to_vec_pretty(&manifest)?)?;
        return Err(e);
    }
    drop(writer);

    let records = ArchiveReader::open(&archive_path)?.read_all()?.records;
    manifest.fronts = write_fronts(&records, dir)?
        .into_iter()
        .map(|p| p.file_name().map(PathBuf::from).unwrap_or(p))
        .collect();
    manifest.finished = chrono::Utc::now().to_rfc3339();
    write_atomically(&dir.join(MANIFEST_FILE), &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(RunOutcome { manifest, dir: dir.into() })
}
