//! Pareto fronts, family tables and genome bundles from archive records.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::Compression;
use metacell_core::cppn::{Genome, SimilarityCoefficients};
use metacell_core::families::{cluster_families, Family};
use metacell_core::homogenization::Objective;
use metacell_core::moea::non_dominated;
use serde::Serialize;

use crate::archive::ArchiveRecord;
use crate::genome_io::GenomeRecord;
use crate::{Error, Result};

/// Indices of the records not dominated by any other record. All records
/// must be feasible and share one objective list.
pub fn pareto_front(records: &[&ArchiveRecord]) -> Vec<usize> {
    let objs: Vec<&[f64]> = records.iter().map(|r| r.fitness.as_deref().expect("feasible record")).collect();
    non_dominated(&objs)
}

/// File-name-safe key of an objective list, such as `max-e_min-nu`.
pub fn objective_key(objectives: &[Objective]) -> String {
    objectives
        .iter()
        .map(|o| o.label().to_ascii_lowercase().replace(' ', "-").replace('/', "-over-"))
        .collect::<Vec<_>>()
        .join("_")
}

/// Feasible records grouped by objective list, each group sorted by
/// `(generation, run id, id)`.
pub fn feasible_by_objectives(records: &[ArchiveRecord]) -> BTreeMap<String, (Vec<Objective>, Vec<&ArchiveRecord>)> {
    let mut groups: BTreeMap<String, (Vec<Objective>, Vec<&ArchiveRecord>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.feasible()) {
        let entry = groups.entry(objective_key(&r.objectives)).or_insert_with(|| (r.objectives.clone(), Vec::new()));
        entry.1.push(r);
    }
    for (_, rs) in groups.values_mut() {
        rs.sort_by(|a, b| (a.generation, &a.run_id, a.id).cmp(&(b.generation, &b.run_id, b.id)));
    }
    groups
}

fn property_header(objectives: &[Objective]) -> Vec<String> {
    let mut h: Vec<String> = vec!["run_id".into(), "id".into(), "generation".into()];
    h.extend(objectives.iter().map(Objective::label));
    for name in ["C11", "C12", "C13", "C22", "C23", "C33", "E", "nu", "volume_fraction"] {
        h.push(name.into());
    }
    h
}

fn property_row(r: &ArchiveRecord) -> Vec<String> {
    let mut row = vec![r.run_id.clone(), r.id.to_string(), r.generation.to_string()];
    let fitness = r.fitness.as_deref().unwrap_or(&[]);
    row.extend(r.objectives.iter().zip(fitness).map(|(o, &f)| fmt(o.property_value(f))));
    match &r.tensor {
        Some(t) => {
            let c = &t.c;
            for v in [c[0][0], c[0][1], c[0][2], c[1][1], c[1][2], c[2][2], t.e, t.nu] {
                row.push(fmt(v));
            }
        }
        None => row.extend(std::iter::repeat_n(String::new(), 8)),
    }
    row.push(r.volume_fraction.map(fmt).unwrap_or_default());
    row
}

/// Shortest representation that reads back to the same value.
fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Writes one `front_<objectives>.csv` per objective list, rows sorted by
/// the first objective. Returns the written paths.
pub fn write_fronts(records: &[ArchiveRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut written = Vec::new();
    for (key, (objectives, group)) in feasible_by_objectives(records) {
        let mut front: Vec<&ArchiveRecord> = pareto_front(&group).into_iter().map(|k| group[k]).collect();
        front.sort_by(|a, b| {
            let (fa, fb) = (a.fitness.as_ref().unwrap(), b.fitness.as_ref().unwrap());
            fa.partial_cmp(fb).unwrap().then((&a.run_id, a.id).cmp(&(&b.run_id, b.id)))
        });
        let path = dir.join(format!("front_{key}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(property_header(&objectives))?;
        for r in front {
            w.write_record(property_row(r))?;
        }
        w.flush().map_err(Error::io(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct FamilyBundle<'a> {
    family: usize,
    representative: u64,
    members: Vec<BundledGenome<'a>>,
}

#[derive(Serialize)]
struct BundledGenome<'a> {
    run_id: &'a str,
    generation: u64,
    genome: &'a GenomeRecord,
}

/// Output of [`write_families`].
#[derive(Debug, Clone)]
pub struct FamilyExport {
    pub families: Vec<Family>,
    pub files: Vec<PathBuf>,
}

/// Clusters the genomes of all feasible records in `(generation, id)` order
/// and writes `families.csv` (membership and properties),
/// `family_summary.csv` and `families.json.gz`.
pub fn write_families(
    records: &[ArchiveRecord],
    dir: &Path,
    coeffs: &SimilarityCoefficients,
    threshold: f64,
) -> Result<FamilyExport> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut feasible: Vec<&ArchiveRecord> = records.iter().filter(|r| r.feasible()).collect();
    feasible.sort_by(|a, b| (a.generation, a.id, &a.run_id).cmp(&(b.generation, b.id, &b.run_id)));
    // Family members are reported by position so records of merged runs
    // with colliding ids stay distinct.
    let genomes: Vec<Genome> =
        feasible.iter().enumerate().map(|(k, r)| r.genome().map(|g| g.with_id(k as u64))).collect::<Result<_>>()?;
    let refs: Vec<&Genome> = genomes.iter().collect();
    let by_position = cluster_families(&refs, coeffs, threshold);
    let lookup = |k: u64| feasible[k as usize];

    let members_path = dir.join("families.csv");
    let mut w = csv::Writer::from_path(&members_path)?;
    let objectives = feasible.first().map(|r| r.objectives.clone()).unwrap_or_default();
    let mut header = vec!["family".to_string(), "representative".into()];
    header.extend(property_header(&objectives));
    w.write_record(&header)?;
    for f in &by_position {
        let rep = lookup(f.representative);
        for &m in &f.members {
            let mut row = vec![f.id.to_string(), rep.id.to_string()];
            row.extend(property_row(lookup(m)));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(Error::io(&members_path))?;

    let summary_path = dir.join("family_summary.csv");
    let mut w = csv::Writer::from_path(&summary_path)?;
    w.write_record(["family", "representative", "size", "E_min", "E_mean", "E_max", "nu_min", "nu_mean", "nu_max"])?;
    for f in &by_position {
        let ts: Vec<_> = f.members.iter().filter_map(|&m| lookup(m).tensor.as_ref()).collect();
        let stats = |get: fn(&crate::archive::TensorRecord) -> f64| {
            let v: Vec<f64> = ts.iter().map(|t| get(t)).collect();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            [fmt(lo), fmt(v.iter().sum::<f64>() / v.len().max(1) as f64), fmt(hi)]
        };
        let mut row = vec![f.id.to_string(), lookup(f.representative).id.to_string(), f.members.len().to_string()];
        row.extend(stats(|t| t.e));
        row.extend(stats(|t| t.nu));
        w.write_record(&row)?;
    }
    w.flush().map_err(Error::io(&summary_path))?;

    let bundle: Vec<FamilyBundle<'_>> = by_position
        .iter()
        .map(|f| FamilyBundle {
            family: f.id,
            representative: lookup(f.representative).id,
            members: f
                .members
                .iter()
                .map(|&m| {
                    let r = lookup(m);
                    BundledGenome { run_id: &r.run_id, generation: r.generation, genome: &r.genome }
                })
                .collect(),
        })
        .collect();
    let bundle_path = dir.join("families.json.gz");
    let file = File::create(&bundle_path).map_err(Error::io(&bundle_path))?;
    let mut gz = GzEncoder::new(file, Compression::default());
    serde_json::to_writer(&mut gz, &bundle)?;
    gz.finish().and_then(|mut f| f.flush()).map_err(Error::io(&bundle_path))?;

    let families = by_position
        .into_iter()
        .map(|f| Family {
            id: f.id,
            representative: lookup(f.representative).id,
            members: f.members.iter().map(|&m| lookup(m).id).collect(),
        })
        .collect();
    Ok(FamilyExport { families, files: vec![members_path, summary_path, bundle_path] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::tests::record;

    #[test]
    fn front_of_three_points() {
        let recs = [record(0, Some(vec![1.0, 2.0])), record(1, Some(vec![2.0, 1.0])), record(2, Some(vec![2.0, 2.0]))];
        let refs: Vec<&ArchiveRecord> = recs.iter().collect();
        assert_eq!(pareto_front(&refs), vec![0, 1]);
        assert_eq!(pareto_front(&refs[..1]), vec![0]);

        let dir = tempfile::tempdir().unwrap();
        let files = write_fronts(&recs, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files[0].ends_with("front_max-e_min-nu.csv"));
        let text = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 3, "{text}");
        // maximized objectives are reported as property values
        assert!(text.lines().nth(1).unwrap().starts_with("t,0,0,-1.0,2.0,"));
    }

    #[test]
    fn identical_genomes_make_one_family() {
        let mut recs: Vec<ArchiveRecord> = (0..4).map(|i| record(i, Some(vec![0.0, i as f64]))).collect();
        let g = recs[0].genome.clone();
        for (k, r) in recs.iter_mut().enumerate() {
            r.genome = g.clone();
            r.genome.id = k as u64;
        }
        let dir = tempfile::tempdir().unwrap();
        let out = write_families(&recs, dir.path(), &SimilarityCoefficients::default(), 1.35).unwrap();
        assert_eq!(out.families.len(), 1);
        assert_eq!(out.families[0].members, vec![0, 1, 2, 3]);
        let summary = fs::read_to_string(dir.path().join("family_summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 2);
    }
}
