use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use metacell::archive::{ArchiveReader, ArchiveRecord};
use metacell::config::RunConfig;
use metacell::core::cppn::SimilarityCoefficients;
use metacell::core::design::FailureKind;
use metacell::core::families::DEFAULT_FAMILY_THRESHOLD;
use metacell::core::geometry::sample_field;
use metacell::export::{pareto_front, write_families, write_fronts};
use metacell::reconstruct::{reconstruct, reconstruct_field, reevaluate};
use metacell::runner::{self, RunManifest, RunOptions, RunStatus, ARCHIVE_FILE, GENERATIONS_FILE, MANIFEST_FILE};
use metacell::verify::P4_SMALL;
use metacell::Error;
use rand::{Rng, SeedableRng};
use tempfile::TempDir;

const TINY: &str = r#"
run_id = "tiny"
symmetry = "p4"
resolution = 21

[evolution]
population_size = 24
max_generations = 4
seed = 3
"#;

struct Run {
    _dir: TempDir,
    records: Vec<ArchiveRecord>,
    manifest: RunManifest,
}

fn tiny() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let config = RunConfig::from_toml(TINY).unwrap();
        let outcome = runner::run(&config, dir.path(), &RunOptions { threads: 2, force: false }).unwrap();
        let summary = ArchiveReader::open(&dir.path().join(ARCHIVE_FILE)).unwrap().read_all().unwrap();
        assert_eq!(summary.corrupt, 0);
        assert!(!summary.truncated_tail);
        Run { _dir: dir, records: summary.records, manifest: outcome.manifest }
    })
}

#[test]
fn run_writes_archive_manifest_and_log() {
    let run = tiny();
    assert_eq!(run.manifest.status, RunStatus::Completed);
    assert_eq!(run.manifest.records, run.records.len());
    // Initial population plus one offspring batch per generation.
    assert_eq!(run.records.len(), 24 * 5);
    let keys: HashSet<(&str, u64)> = run.records.iter().map(|r| (r.run_id.as_str(), r.id)).collect();
    assert_eq!(keys.len(), run.records.len());
    let dir = run._dir.path();
    assert!(dir.join(MANIFEST_FILE).exists());
    let log = std::fs::read_to_string(dir.join(GENERATIONS_FILE)).unwrap();
    assert_eq!(log.lines().count(), 1 + 5);
    assert_eq!(RunManifest::load(&dir.join(MANIFEST_FILE)).unwrap(), run.manifest);
}

#[test]
fn second_run_needs_force() {
    let dir = TempDir::new().unwrap();
    let mut config = RunConfig::from_toml(TINY).unwrap();
    config.evolution.max_generations = 0;
    runner::run(&config, dir.path(), &RunOptions::default()).unwrap();
    let again = runner::run(&config, dir.path(), &RunOptions::default());
    assert!(matches!(again, Err(Error::AlreadyExists(_))), "{again:?}");
    runner::run(&config, dir.path(), &RunOptions { threads: 0, force: true }).unwrap();
}

#[test]
fn feasible_records_rehomogenize_to_the_stored_tensor() {
    let run = tiny();
    let feasible: Vec<&ArchiveRecord> = run.records.iter().filter(|r| r.feasible()).collect();
    assert!(!feasible.is_empty());
    for r in feasible.iter().take(25) {
        let ev = reevaluate(r, None).unwrap();
        let stored = r.tensor.as_ref().unwrap();
        let fresh = ev.detail.tensor.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((stored.c[i][j] - fresh.c[i][j]).abs() <= 1e-8, "record {}: C{i}{j}", r.id);
            }
        }
        assert_eq!(ev.fitness.as_deref(), r.fitness.as_deref());
    }
}

#[test]
fn reconstruction_reproduces_labels_and_failures() {
    let run = tiny();
    for r in &run.records {
        match r.failure {
            None => {
                let rec = reconstruct(r, None).unwrap();
                let direct = sample_field(&r.genome().unwrap(), &rec.cloud, r.threshold).unwrap();
                assert_eq!(rec.field.labels, direct.labels);
                assert!((rec.mesh.volume_fraction() - r.volume_fraction.unwrap()).abs() < 1e-12);
            }
            Some(kind) => {
                assert_eq!(reevaluate(r, None).unwrap().detail.failure, Some(kind), "record {}", r.id);
                let geometric = matches!(
                    kind,
                    FailureKind::DegenerateField | FailureKind::EmptyDesign | FailureKind::Disconnected | FailureKind::Meshing
                );
                if geometric {
                    match reconstruct(r, None) {
                        Err(Error::Design(k)) => assert_eq!(k, kind, "record {}", r.id),
                        other => panic!("record {} failed with {kind:?} but reconstructs as {:?}", r.id, other.map(|_| ())),
                    }
                }
            }
        }
    }
    assert!(run.records.iter().any(|r| r.failure == Some(FailureKind::Disconnected)));
}

#[test]
fn double_resolution_boundary_stays_close() {
    let run = tiny();
    let mut close = 0;
    let mut total = 0;
    for r in run.records.iter().filter(|r| r.feasible()).take(20) {
        let (coarse, a) = reconstruct_field(r, None).unwrap();
        let (_, b) = reconstruct_field(r, Some(2 * r.resolution)).unwrap();
        let dist = |p: (f64, f64), set: &[metacell::core::geometry::BoundaryPoint]| {
            set.iter().map(|q| (p.0 - q.position.0).hypot(p.1 - q.position.1)).fold(f64::INFINITY, f64::min)
        };
        let h1 = a.boundary.iter().map(|p| dist(p.position, &b.boundary)).fold(0.0, f64::max);
        let h2 = b.boundary.iter().map(|p| dist(p.position, &a.boundary)).fold(0.0, f64::max);
        total += 1;
        if h1.max(h2) <= 1.0 / coarse.intervals() as f64 {
            close += 1;
        }
    }
    assert!(total > 0);
    assert!(close * 3 >= total * 2, "{close} of {total} within one coarse spacing");
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

#[test]
fn pareto_front_matches_brute_force() {
    let template = tiny().records.iter().find(|r| r.feasible()).unwrap().clone();
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let records: Vec<ArchiveRecord> = (0..1000u64)
        .map(|id| {
            // Coarse values so that ties and duplicates occur.
            let f = vec![rng.random_range(0..40) as f64 / 4.0, rng.random_range(0..40) as f64 / 4.0];
            ArchiveRecord { id, fitness: Some(f), ..template.clone() }
        })
        .collect();
    let refs: Vec<&ArchiveRecord> = records.iter().collect();
    let mut got = pareto_front(&refs);
    got.sort_unstable();
    let fit = |k: usize| records[k].fitness.as_deref().unwrap();
    let expected: Vec<usize> = (0..records.len()).filter(|&i| !(0..records.len()).any(|j| dominates(fit(j), fit(i)))).collect();
    assert_eq!(got, expected);
}

#[test]
fn export_writes_fronts_and_families() {
    let run = tiny();
    let out = TempDir::new().unwrap();
    let fronts = write_fronts(&run.records, out.path()).unwrap();
    assert_eq!(fronts.len(), 1);
    let text = std::fs::read_to_string(&fronts[0]).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("run_id,id,generation,"), "{header}");
    assert!(text.lines().count() >= 2);
    let fam = write_families(&run.records, out.path(), &SimilarityCoefficients::default(), DEFAULT_FAMILY_THRESHOLD).unwrap();
    let members: usize = fam.families.iter().map(|f| f.members.len()).sum();
    assert_eq!(members, run.records.iter().filter(|r| r.feasible()).count());
    for f in &fam.files {
        assert!(f.exists());
    }
}

#[test]
fn p4_small_exports_quickly() {
    let dir = TempDir::new().unwrap();
    let config = RunConfig::from_toml(P4_SMALL).unwrap();
    runner::run(&config, dir.path(), &RunOptions::default()).unwrap();
    let archive = dir.path().join(ARCHIVE_FILE);
    let start = Instant::now();
    let records = ArchiveReader::open(&archive).unwrap().read_all().unwrap().records;
    let out = dir.path().join("export");
    write_fronts(&records, &out).unwrap();
    write_families(&records, &out, &SimilarityCoefficients::default(), DEFAULT_FAMILY_THRESHOLD).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "export of {} records took {elapsed:.1} s", records.len());
    assert!(Path::new(&out).join("families.csv").exists());
}
