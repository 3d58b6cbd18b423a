//! Acceptance property suites, shared by `metacell verify` and the
//! `acceptance` test target.
//!
//! Each [`Criterion`] computes its quantity at a fixed tolerance and reports
//! a [`Check`]; [`run`] adds timing against the criterion's time budget.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use metacell_core::cppn::{
    mutate, similarity, Activation, ConnectionGene, Genome, Marker, MutationRates, NodeGene, SimilarityCoefficients,
    INPUT_X, INPUT_Y, OUTPUT,
};
use metacell_core::design::{CppnVariation, DesignProblem};
use metacell_core::families::{cluster_families, DEFAULT_FAMILY_THRESHOLD};
use metacell_core::geometry::{
    build_mesh, check_constraints, extract_boundary, label, sample_field, GroupTag, Label, PointCloud, SampledField,
};
use metacell_core::homogenization::{homogenize, homogenized_stiffness, BaseMaterial, ElasticTensor, Objective, Property};
use metacell_core::moea::synthetic::{analytic_hypervolume, ConvexFront, RealVector};
use metacell_core::moea::{
    apd, hypervolume, non_dominated, select, Candidate, Evolution, ReferenceVectorSet, RveaConfig, Variation,
};
use metacell_core::rng::{stream, Purpose};
use rand::Rng;
use rayon::prelude::*;

use crate::archive::{ArchiveReader, ArchiveRecord, ArchiveWriter};
use crate::config::RunConfig;
use crate::export::pareto_front;
use crate::genome_io::GenomeRecord;
use crate::reconstruct::reconstruct_field;
use crate::runner::{run as run_experiment, RunOptions};
use crate::Result;

/// The bundled small p4 experiment.
pub const P4_SMALL: &str = include_str!("../examples/p4_small.toml");

/// Result of one property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Check { passed, detail: detail.into() }
    }
}

/// A named property suite with an optional time budget.
pub struct Criterion {
    pub name: &'static str,
    pub summary: &'static str,
    pub budget: Option<Duration>,
    /// Takes minutes rather than seconds.
    pub slow: bool,
    check: fn() -> Result<Check>,
}

/// A finished [`Criterion`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub summary: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budget = self.budget.map(|b| format!(" / {:.0} s", b.as_secs_f64())).unwrap_or_default();
        write!(
            f,
            "{} {:<24} {:.2} s{budget}  {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.summary,
            self.detail
        )
    }
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            name: "homogenization-identity",
            summary: "solid cell reproduces the base material",
            budget: secs(1),
            slow: false,
            check: homogenization_identity,
        },
        Criterion {
            name: "laminate",
            summary: "half-width stripe C11 = 0.5 E/(1 - nu^2) within 2%",
            budget: secs(5),
            slow: false,
            check: laminate,
        },
        Criterion {
            name: "symmetry-structure",
            summary: "p4mm tetragonal to 1e-6, p31m isotropic to 2%",
            budget: secs(300),
            slow: true,
            check: symmetry_structure,
        },
        Criterion {
            name: "poisson-bound",
            summary: "feasible p31m designs have -1 < nu < 1",
            budget: secs(300),
            slow: true,
            check: poisson_bound,
        },
        Criterion {
            name: "selection-oracle",
            summary: "select equals brute force on 500 instances",
            budget: secs(30),
            slow: false,
            check: selection_oracle,
        },
        Criterion {
            name: "apd-values",
            summary: "angle penalized distance hand values to 1e-12",
            budget: None,
            slow: false,
            check: apd_values,
        },
        Criterion {
            name: "benchmark-hypervolume",
            summary: "synthetic front hypervolume within 5% (median of 5 seeds)",
            budget: secs(60),
            slow: false,
            check: benchmark_hypervolume,
        },
        Criterion {
            name: "auxetic-smoke",
            summary: "p4 front reaches nu < -0.2 in 2 of 3 seeds",
            budget: secs(1800),
            slow: true,
            check: auxetic_smoke,
        },
        Criterion {
            name: "connectivity-oracle",
            summary: "constraint check equals 3x3 tiling flood fill on 200 genomes",
            budget: secs(60),
            slow: false,
            check: connectivity_oracle,
        },
        Criterion {
            name: "lossless-roundtrip",
            summary: "1000 archived genomes reproduce labels, mean record < 20 KB",
            budget: secs(120),
            slow: false,
            check: lossless_roundtrip,
        },
        Criterion {
            name: "similarity-clustering",
            summary: "distance hand values and 3-family partition",
            budget: None,
            slow: false,
            check: similarity_clustering,
        },
        Criterion {
            name: "determinism",
            summary: "same seed gives byte-identical fronts for any thread count",
            budget: None,
            slow: true,
            check: determinism,
        },
    ]
}

pub fn find(name: &str) -> Option<Criterion> {
    criteria().into_iter().find(|c| c.name == name)
}

/// Runs one suite. Errors and overrun budgets count as failures.
pub fn run(criterion: &Criterion) -> Outcome {
    let start = Instant::now();
    let result = (criterion.check)();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(c) => (c.passed, c.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = criterion.budget {
        if elapsed > b {
            passed = false;
            detail.push_str(&format!("; exceeded the {:.0} s budget", b.as_secs_f64()));
        }
    }
    Outcome {
        name: criterion.name,
        summary: criterion.summary,
        passed,
        detail,
        elapsed,
        budget: criterion.budget,
    }
}

fn field_from_values(cloud: &PointCloud, f: impl Fn(f64, f64) -> f64) -> SampledField {
    let normalized: Vec<f64> = (0..cloud.len())
        .map(|k| {
            let (i, j) = cloud.coords(cloud.representative(k));
            let (x, y) = cloud.position(i, j);
            f(x, y)
        })
        .collect();
    SampledField {
        labels: label(&normalized, 0.5),
        boundary: extract_boundary(&normalized, cloud, 0.5),
        raw: normalized.clone(),
        normalized,
        threshold: 0.5,
    }
}

fn homogenization_identity() -> Result<Check> {
    let material = BaseMaterial::new(1.0, 0.3)?;
    let d = material.stiffness();
    let norm = d.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    let mut constants = (0.0, 0.0);
    for tag in GroupTag::ALL {
        let cloud = PointCloud::new(tag, 35)?;
        let mesh = build_mesh(&field_from_values(&cloud, |_, _| 1.0), &cloud)?;
        let t = homogenize(&mesh, &material)?;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((t.c[i][j] - d[i][j]).abs() / norm);
            }
        }
        worst = worst.max((t.e_avg - 1.0).abs()).max((t.nu_avg - 0.3).abs());
        constants = (t.e_avg, t.nu_avg);
    }
    Ok(Check::new(
        worst < 1e-8,
        format!("max relative deviation {worst:.2e} over all groups, E = {:.12}, nu = {:.12}", constants.0, constants.1),
    ))
}

/// Horizontal band `1/4 <= y <= 3/4` from a two-node genome:
/// `sin(2 pi y - pi/2)`.
pub fn band_genome() -> Genome {
    Genome::new(
        0,
        vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(Activation::Sine, -FRAC_PI_2)],
        vec![ConnectionGene::new(Marker(3), INPUT_Y, OUTPUT, 2.0 * PI)],
    )
    .expect("valid genome")
}

fn laminate() -> Result<Check> {
    let material = BaseMaterial::new(1.0, 0.3)?;
    let cloud = PointCloud::new(GroupTag::P1, 35)?;
    let field = sample_field(&band_genome(), &cloud, 0.5)?;
    let mesh = build_mesh(&field, &cloud)?;
    // A stripe has no transverse stiffness, so only C is defined.
    let c = homogenized_stiffness(&mesh, &material)?;
    let target = 0.5 * material.youngs_modulus / (1.0 - material.poisson_ratio.powi(2));
    let err = (c[0][0] - target).abs() / target;
    Ok(Check::new(
        err <= 0.02,
        format!(
            "C11 = {:.6} (volume fraction {:.4}) vs {:.6}: {:.2}% off",
            c[0][0],
            mesh.volume_fraction(),
            target,
            100.0 * err
        ),
    ))
}

/// A reproducible random genome: a fresh individual followed by a few
/// rounds of mutation.
pub fn random_genome(seed: u64, index: u64) -> Genome {
    let mut variation = CppnVariation::new(MutationRates::default());
    let mut rng = stream(seed, Purpose::Auxiliary, 0, index);
    let mut g = variation.random(index, &mut rng);
    let rounds = rng.random_range(0..8);
    for _ in 0..rounds {
        g = mutate(&g, &mut variation.registry, &variation.rates, &mut rng);
    }
    g.with_id(index)
}

/// Tensors of the first `count` feasible random genomes of `tag`.
fn feasible_tensors(tag: GroupTag, count: usize, seed: u64) -> Result<(Vec<ElasticTensor>, usize)> {
    let objectives = vec![Objective::maximize(Property::E), Objective::minimize(Property::Nu)];
    let problem = DesignProblem::new(tag, 35, BaseMaterial::default(), objectives)?;
    let mut found = Vec::new();
    let mut tried = 0u64;
    const BATCH: u64 = 256;
    while found.len() < count && tried < 40_000 {
        let batch: Vec<Option<ElasticTensor>> = (tried..tried + BATCH)
            .into_par_iter()
            .map(|k| {
                let ev = problem.evaluate(&random_genome(seed, k));
                (ev.cv == 0.0).then_some(ev.detail.tensor).flatten()
            })
            .collect();
        found.extend(batch.into_iter().flatten());
        tried += BATCH;
    }
    found.truncate(count);
    Ok((found, tried as usize))
}

struct SymmetrySamples {
    p4mm: Vec<ElasticTensor>,
    p31m: Vec<ElasticTensor>,
}

fn symmetry_samples() -> std::result::Result<&'static SymmetrySamples, String> {
    static SAMPLES: OnceLock<std::result::Result<SymmetrySamples, String>> = OnceLock::new();
    SAMPLES
        .get_or_init(|| {
            let (p4mm, _) = feasible_tensors(GroupTag::P4mm, 100, 3).map_err(|e| e.to_string())?;
            let (p31m, _) = feasible_tensors(GroupTag::P31m, 100, 4).map_err(|e| e.to_string())?;
            Ok(SymmetrySamples { p4mm, p31m })
        })
        .as_ref()
        .map_err(Clone::clone)
}

fn symmetry_structure() -> Result<Check> {
    let s = match symmetry_samples() {
        Ok(s) => s,
        Err(e) => return Ok(Check::new(false, e)),
    };
    if s.p4mm.len() < 100 || s.p31m.len() < 100 {
        return Ok(Check::new(false, format!("only {} p4mm and {} p31m feasible designs", s.p4mm.len(), s.p31m.len())));
    }
    let tetragonal = s
        .p4mm
        .iter()
        .map(|t| {
            let c = &t.c;
            [(c[0][0] - c[1][1]).abs(), c[0][2].abs(), c[1][2].abs()].into_iter().fold(0.0, f64::max) / t.norm()
        })
        .fold(0.0, f64::max);
    let isotropy = s.p31m.iter().map(ElasticTensor::isotropy_residual).fold(0.0, f64::max);
    Ok(Check::new(
        tetragonal < 1e-6 && isotropy < 0.02,
        format!("p4mm worst {tetragonal:.2e} |C|, p31m worst isotropy residual {:.3}%", 100.0 * isotropy),
    ))
}

fn poisson_bound() -> Result<Check> {
    let s = match symmetry_samples() {
        Ok(s) => s,
        Err(e) => return Ok(Check::new(false, e)),
    };
    let lo = s.p31m.iter().map(|t| t.nu_avg).fold(f64::INFINITY, f64::min);
    let hi = s.p31m.iter().map(|t| t.nu_avg).fold(f64::NEG_INFINITY, f64::max);
    let inside = s.p31m.iter().all(|t| t.nu_avg > -1.0 && t.nu_avg < 1.0);
    Ok(Check::new(
        inside && s.p31m.len() >= 100,
        format!("{} feasible p31m designs, nu in [{lo:.4}, {hi:.4}]", s.p31m.len()),
    ))
}

/// Survivor per vector by direct enumeration of the partition and the
/// feasibility-first elitism rule, with the penalized distance written out.
fn brute_force_select(objs: &[Vec<f64>], cvs: &[f64], v: &ReferenceVectorSet, t: usize, t_max: usize, alpha: f64) -> Vec<usize> {
    let m = objs[0].len();
    let z: Vec<f64> = (0..m).map(|k| objs.iter().map(|o| o[k]).fold(f64::INFINITY, f64::min)).collect();
    let f: Vec<Vec<f64>> = objs.iter().map(|o| o.iter().zip(&z).map(|(a, b)| a - b).collect()).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let owner = |i: usize| {
        let n = norm(&f[i]);
        if n == 0.0 {
            return 0;
        }
        let cos: Vec<f64> = v.current.iter().map(|r| dot(&f[i], r) / n).collect();
        let best = cos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        cos.iter().position(|&c| c == best).unwrap()
    };
    let distance = |i: usize, k: usize| {
        let n = norm(&f[i]);
        if n == 0.0 {
            return 0.0;
        }
        let phi = (dot(&f[i], &v.current[k]) / n).clamp(-1.0, 1.0).acos();
        let progress = if t_max == 0 { 1.0 } else { t as f64 / t_max as f64 };
        n * (1.0 + m as f64 * progress.powf(alpha) * phi / v.gamma[k])
    };
    let mut out = Vec::new();
    for k in 0..v.len() {
        let members: Vec<usize> = (0..f.len()).filter(|&i| owner(i) == k).collect();
        if members.is_empty() {
            continue;
        }
        let feasible: Vec<usize> = members.iter().copied().filter(|&i| cvs[i] == 0.0).collect();
        let winner = if feasible.is_empty() {
            *members.iter().min_by(|&&a, &&b| cvs[a].total_cmp(&cvs[b]).then(a.cmp(&b))).unwrap()
        } else {
            *feasible.iter().min_by(|&&a, &&b| distance(a, k).total_cmp(&distance(b, k)).then(a.cmp(&b))).unwrap()
        };
        out.push(winner);
    }
    out
}

fn selection_oracle() -> Result<Check> {
    let mut mismatches = 0;
    let mut first = String::new();
    for case in 0..500u64 {
        let mut rng = stream(2024, Purpose::Auxiliary, 1, case);
        let h = rng.random_range(1..=3);
        let mut v = ReferenceVectorSet::simplex_lattice(2, h)?;
        if rng.random::<bool>() {
            let scale = [rng.random_range(0.2..5.0), rng.random_range(0.2..5.0)];
            v.adapt(&[0.0, 0.0], &scale);
        }
        let n = rng.random_range(1..=12);
        let objs: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                // integer grid points make exact ties and duplicates common
                if rng.random::<bool>() {
                    vec![rng.random_range(0..5) as f64, rng.random_range(0..5) as f64]
                } else {
                    vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]
                }
            })
            .collect();
        let cvs: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.6 { 0.0 } else { rng.random_range(1..4) as f64 }).collect();
        let t_max = 20;
        let t = rng.random_range(0..=t_max);
        let cands: Vec<Candidate<'_>> = objs.iter().zip(&cvs).map(|(o, &cv)| Candidate { objectives: o, cv }).collect();
        let got = select(&cands, &v, t, t_max, 2.0)?;
        let want = brute_force_select(&objs, &cvs, &v, t, t_max, 2.0);
        if got != want {
            mismatches += 1;
            if first.is_empty() {
                first = format!("; first mismatch in case {case}: {got:?} vs {want:?}");
            }
        }
    }
    Ok(Check::new(mismatches == 0, format!("{mismatches} of 500 instances differ{first}")))
}

fn apd_values() -> Result<Check> {
    let diag = ReferenceVectorSet::simplex_lattice(2, 2)?;
    let cases = [
        // t = 0: no penalty, d = |f'|
        ("t = 0", apd(&[3.0, 4.0], &[1.0, 0.0], FRAC_PI_4, 0, 10, 2.0, 2), 5.0),
        ("aligned", apd(&[1.0, 0.0], &[1.0, 0.0], FRAC_PI_4, 7, 10, 2.0, 2), 1.0),
        ("aligned at t_max", apd(&[1.0, 0.0], &[1.0, 0.0], FRAC_PI_4, 10, 10, 2.0, 2), 1.0),
        ("45 degrees at t_max", apd(&[1.0, 1.0], &[1.0, 0.0], FRAC_PI_4, 10, 10, 2.0, 2), SQRT_2 * 3.0),
        ("ideal point", apd(&[0.0, 0.0], &[1.0, 0.0], FRAC_PI_4, 10, 10, 2.0, 2), 0.0),
        ("lattice gamma", apd(&[1.0, 1.0], &diag.current[0], diag.gamma[0], 10, 10, 2.0, 2), SQRT_2 * 3.0),
    ];
    let worst = cases.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let listed: Vec<String> = cases.iter().map(|(n, g, _)| format!("{n}: {g:.12}")).collect();
    Ok(Check::new(worst <= 1e-12, format!("max error {worst:.1e} ({})", listed.join(", "))))
}

fn benchmark_hypervolume() -> Result<Check> {
    let exact = analytic_hypervolume([1.1, 1.1]);
    let runs: Vec<Result<f64>> = (0..5u64)
        .into_par_iter()
        .map(|seed| {
            let config = RveaConfig { population_size: 100, max_generations: 200, seed, ..RveaConfig::default() };
            let mut e = Evolution::new(config, RealVector::default(), ConvexFront)?;
            let mut archive: Vec<Vec<f64>> = Vec::new();
            e.run(|_, born| archive.extend(born.iter().filter(|i| i.feasible()).map(|i| i.objectives.clone())))?;
            let front: Vec<&Vec<f64>> = non_dominated(&archive).into_iter().map(|k| &archive[k]).collect();
            Ok(hypervolume(&front, &[1.1, 1.1]))
        })
        .collect();
    let mut hv = runs.into_iter().collect::<Result<Vec<f64>>>()?;
    hv.sort_by(f64::total_cmp);
    let median = hv[2];
    let err = (median - exact).abs() / exact;
    Ok(Check::new(err < 0.05, format!("median {median:.5} vs analytic {exact:.5} ({:.2}% off)", 100.0 * err)))
}

fn smoke_config(seed: u64) -> Result<RunConfig> {
    let mut c = RunConfig::from_toml(P4_SMALL)?;
    c.evolution.seed = seed;
    c.run_id = format!("p4_small-seed{seed}");
    Ok(c)
}

fn auxetic_smoke() -> Result<Check> {
    let tmp = tempdir()?;
    let mut hits = 0;
    let mut notes = Vec::new();
    for seed in 1..=3u64 {
        let dir = tmp.join(format!("seed{seed}"));
        run_experiment(&smoke_config(seed)?, &dir, &RunOptions { threads: 0, force: true })?;
        let records = ArchiveReader::open(&dir.join(crate::runner::ARCHIVE_FILE))?.read_all()?.records;
        let feasible: Vec<&ArchiveRecord> = records.iter().filter(|r| r.feasible()).collect();
        let front = pareto_front(&feasible);
        let best = front
            .iter()
            .filter_map(|&k| feasible[k].tensor.as_ref().map(|t| t.nu))
            .fold(f64::INFINITY, f64::min);
        if best < -0.2 {
            hits += 1;
        }
        notes.push(format!("seed {seed}: min front nu {best:.3}"));
    }
    let _ = fs::remove_dir_all(&tmp);
    Ok(Check::new(hits >= 2, format!("{hits}/3 seeds auxetic ({})", notes.join(", "))))
}

fn tempdir() -> Result<std::path::PathBuf> {
    static COUNTER: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
    let n = COUNTER.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("metacell-verify-{}-{n}", std::process::id()));
    fs::create_dir_all(&dir).map_err(crate::Error::io(&dir))?;
    Ok(dir)
}

/// Interior component count and x/y percolation by explicit flood fills:
/// one over the closed grid, and one per solid site over a 3 x 3 tiling.
pub fn flood_fill_connectivity(labels: &[Label], cloud: &PointCloud) -> (usize, bool, bool) {
    let n = cloud.resolution();
    let m = n - 1;
    let offsets = cloud.lattice().neighbor_offsets();
    let solid = |i: usize, j: usize| labels[j * n + i] > 0;
    let fill = |w: usize, start: usize, is_solid: &dyn Fn(usize, usize) -> bool| {
        let mut seen = vec![false; w * w];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (a, b) = ((p % w) as i64, (p / w) as i64);
            for &(da, db) in offsets {
                let (c, d) = (a + da, b + db);
                if c < 0 || d < 0 || c >= w as i64 || d >= w as i64 {
                    continue;
                }
                let k = d as usize * w + c as usize;
                if !seen[k] && is_solid(c as usize, d as usize) {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        seen
    };

    let mut covered = vec![false; n * n];
    let mut components = 0;
    for k in 0..n * n {
        if solid(k % n, k / n) && !covered[k] {
            components += 1;
            for (c, r) in covered.iter_mut().zip(fill(n, k, &solid)) {
                *c |= r;
            }
        }
    }

    let w = 3 * m;
    let tiled = |a: usize, b: usize| solid(a % m, b % m);
    let (mut x, mut y) = (false, false);
    for j in 0..m {
        for i in 0..m {
            if x && y {
                break;
            }
            if !solid(i, j) {
                continue;
            }
            let reach = fill(w, (m + j) * w + m + i, &tiled);
            x |= reach[(m + j) * w + 2 * m + i] || reach[(m + j) * w + i];
            y |= reach[(2 * m + j) * w + m + i] || reach[j * w + m + i];
        }
    }
    (components, x, y)
}

fn connectivity_oracle() -> Result<Check> {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut index = 0u64;
    while checked < 200 {
        let tag = GroupTag::ALL[index as usize % GroupTag::ALL.len()];
        let cloud = PointCloud::new(tag, 17 + 4 * (index as usize % 5))?;
        let genome = random_genome(99, index);
        index += 1;
        let Ok(field) = sample_field(&genome, &cloud, 0.5) else { continue };
        if field.material_count() == 0 {
            continue;
        }
        let report = check_constraints(&field.labels, &cloud);
        let (c, x, y) = flood_fill_connectivity(&field.labels, &cloud);
        let violation = (c - 1 + usize::from(!x) + usize::from(!y)) as u32;
        if (report.interior_components, report.x_connected, report.y_connected, report.violation) != (c, x, y, violation) {
            mismatches.push(format!("{tag} genome {}", index - 1));
        }
        checked += 1;
    }
    Ok(Check::new(
        mismatches.is_empty(),
        format!("{} of {checked} genomes differ {}", mismatches.len(), mismatches.join(", ")),
    ))
}

fn lossless_roundtrip() -> Result<Check> {
    let tmp = tempdir()?;
    let path = tmp.join("roundtrip.mca");
    let objectives = vec![Objective::maximize(Property::E), Objective::minimize(Property::Nu)];
    let problems: Vec<DesignProblem> = GroupTag::ALL
        .iter()
        .map(|&tag| DesignProblem::new(tag, 35, BaseMaterial::default(), objectives.clone()))
        .collect::<metacell_core::Result<_>>()?;
    let originals: Vec<(ArchiveRecord, Option<Vec<Label>>)> = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let problem = &problems[k as usize % problems.len()];
            let genome = random_genome(7, k);
            let labels = sample_field(&genome, &problem.cloud, problem.threshold).ok().map(|f| f.labels);
            let ev = problem.evaluate(&genome);
            let mut record = ArchiveRecord {
                run_id: "roundtrip".into(),
                generation: k / 100,
                id: k,
                genome: GenomeRecord::from(&genome),
                symmetry: problem.cloud.tag(),
                resolution: problem.cloud.resolution(),
                threshold: problem.threshold,
                material: problem.material,
                objectives: objectives.clone(),
                cv: ev.cv,
                fitness: ev.fitness.clone(),
                tensor: None,
                volume_fraction: None,
                failure: None,
            };
            record.set_detail(&ev.detail);
            (record, labels)
        })
        .collect();
    let mut writer = ArchiveWriter::create(&path, true)?;
    for (r, _) in &originals {
        writer.append(r)?;
    }
    writer.sync()?;
    let mean_bytes = writer.bytes() as f64 / originals.len() as f64;
    drop(writer);

    let read = ArchiveReader::open(&path)?.read_all()?;
    let mut mismatches = 0;
    for ((orig, labels), back) in originals.iter().zip(&read.records) {
        let again = reconstruct_field(back, None).ok().map(|(_, f)| f.labels);
        if back != orig || &again != labels {
            mismatches += 1;
        }
    }
    let _ = fs::remove_dir_all(&tmp);
    let complete = read.records.len() == originals.len() && read.corrupt == 0;
    Ok(Check::new(
        complete && mismatches == 0 && mean_bytes < 20_000.0,
        format!(
            "{} records read back, {mismatches} label mismatches, mean compressed record {:.0} bytes",
            read.records.len(),
            mean_bytes
        ),
    ))
}

fn small_genome(id: u64, hidden: bool, connections: &[(u64, Marker, Marker, f64)]) -> Genome {
    let mut nodes = vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(Activation::Sine, 0.0)];
    if hidden {
        nodes.push(NodeGene::hidden(Marker(3), Activation::Gaussian, 0.0));
    }
    let conns = connections.iter().map(|&(m, s, t, w)| ConnectionGene::new(Marker(m), s, t, w)).collect();
    Genome::new(id, nodes, conns).expect("valid genome")
}

fn similarity_clustering() -> Result<Check> {
    let coeffs = SimilarityCoefficients::default();
    let mut problems = Vec::new();

    let a = random_genome(5, 1);
    if similarity(&a, &a, &coeffs) != 0.0 {
        problems.push("self distance is not zero".to_string());
    }

    // b = a plus two excess connection genes, six genes in b
    let h = Marker(3);
    let base = small_genome(0, true, &[]);
    let extended = small_genome(1, true, &[(4, INPUT_X, h, 0.7), (5, h, OUTPUT, -0.4)]);
    let excess = similarity(&base, &extended, &coeffs);
    if extended.gene_count() != 6 || (excess - 0.5 * 2.0 / 6.0).abs() > 1e-12 {
        problems.push(format!("excess example gives {excess}"));
    }

    // same topology, mean weight difference 0.2
    let p = small_genome(2, false, &[(4, INPUT_X, OUTPUT, 0.5), (5, INPUT_Y, OUTPUT, -0.1)]);
    let q = small_genome(3, false, &[(4, INPUT_X, OUTPUT, 0.7), (5, INPUT_Y, OUTPUT, 0.1)]);
    let weights = similarity(&p, &q, &coeffs);
    if (weights - 0.2).abs() > 1e-12 {
        problems.push(format!("weight example gives {weights}"));
    }

    // Three founders far apart in weight space, each with four close
    // variants, presented interleaved.
    let founders = [3.0, 0.0, -3.0];
    let mut set = Vec::new();
    let mut truth = Vec::new();
    for variant in 0..5u64 {
        for (family, &w) in founders.iter().enumerate() {
            let id = set.len() as u64;
            let dw = 0.05 * variant as f64;
            set.push(small_genome(id, false, &[(4, INPUT_X, OUTPUT, w + dw), (5, INPUT_Y, OUTPUT, w - dw)]));
            truth.push(family);
        }
    }
    let refs: Vec<&Genome> = set.iter().collect();
    let families = cluster_families(&refs, &coeffs, DEFAULT_FAMILY_THRESHOLD);
    let mut assigned = vec![usize::MAX; set.len()];
    for f in &families {
        for &m in &f.members {
            assigned[m as usize] = f.id;
        }
    }
    let partition_ok = families.len() == 3 && assigned == truth;
    let threshold_ok = families.iter().all(|f| {
        let rep = &set[f.representative as usize];
        f.members.iter().all(|&m| similarity(rep, &set[m as usize], &coeffs) < DEFAULT_FAMILY_THRESHOLD)
    });
    if !partition_ok || !threshold_ok {
        problems.push(format!("clustering gave {} families: {assigned:?}", families.len()));
    }
    Ok(Check::new(
        problems.is_empty(),
        if problems.is_empty() {
            format!("excess example {excess:.12}, weight example {weights:.12}, 3 families recovered")
        } else {
            problems.join("; ")
        },
    ))
}

fn front_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(crate::Error::io(dir))? {
        let path = entry.map_err(crate::Error::io(dir))?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("front_") && name.ends_with(".csv") {
            files.push((name, fs::read(&path).map_err(crate::Error::io(&path))?));
        }
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Result<Check> {
    let tmp = tempdir()?;
    let config = smoke_config(7)?;
    let threads = [1, std::thread::available_parallelism().map_or(4, |n| n.get()).max(2)];
    let mut outputs = Vec::new();
    for t in threads {
        let dir = tmp.join(format!("threads{t}"));
        run_experiment(&config, &dir, &RunOptions { threads: t, force: true })?;
        outputs.push(front_files(&dir)?);
    }
    let _ = fs::remove_dir_all(&tmp);
    let same = outputs[0] == outputs[1] && !outputs[0].is_empty();
    let rows: usize = outputs[0].iter().map(|(_, b)| b.iter().filter(|&&c| c == b'\n').count()).sum();
    Ok(Check::new(
        same,
        format!(
            "{} front file(s), {rows} lines, threads {} vs {}: {}",
            outputs[0].len(),
            threads[0],
            threads[1],
            if same { "identical" } else { "different" }
        ),
    ))
}
