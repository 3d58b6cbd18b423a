use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use metacell::archive::ArchiveReader;
use metacell::config::RunConfig;
use metacell::core::cppn::SimilarityCoefficients;
use metacell::core::design::FailureKind;
use metacell::core::families::DEFAULT_FAMILY_THRESHOLD;
use metacell::core::geometry::{build_mesh, check_constraints, sample_field, GroupTag, PointCloud};
use metacell::core::homogenization::{homogenized_stiffness, BaseMaterial, ElasticTensor, Matrix3};
use metacell::export::{write_families, write_fronts};
use metacell::genome_io::read_genome;
use metacell::runner::{self, RunOptions};
use metacell::{render, verify, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "metacell", version, about = "Evolve, evaluate and export periodic metamaterial unit cells")]
struct Cli {
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evolution described by a TOML or JSON configuration.
    Run {
        config: PathBuf,
        /// Overrides `evolution.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation threads; all cores by default.
        #[arg(long, env = "METACELL_THREADS")]
        threads: Option<usize>,
        /// Output directory; overrides `output_dir`.
        #[arg(long, env = "METACELL_OUTPUT_DIR")]
        output: Option<PathBuf>,
        /// Replace an existing archive.
        #[arg(long)]
        force: bool,
        /// Validate the configuration and print the resolved parameters.
        #[arg(long)]
        dry_run: bool,
    },
    /// Evaluate a single genome file.
    Eval {
        genome: PathBuf,
        #[arg(long, default_value = "p1")]
        symmetry: GroupTag,
        #[arg(long, default_value_t = 35)]
        resolution: usize,
        #[arg(long, default_value_t = 1.0)]
        youngs_modulus: f64,
        #[arg(long, default_value_t = 0.3)]
        poisson_ratio: f64,
        /// Write the unit cell and its 3 x 3 tessellation as SVG.
        #[arg(long)]
        render: Option<PathBuf>,
        /// Write the triangle mesh in OFF format.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Export Pareto fronts and genome families from archives.
    Export {
        #[arg(required = true)]
        archives: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        #[arg(long, env = "METACELL_OUTPUT_DIR", default_value = "export")]
        out: PathBuf,
        /// Family distance threshold.
        #[arg(long, default_value_t = DEFAULT_FAMILY_THRESHOLD)]
        threshold: f64,
    },
    /// Run the acceptance property suites.
    Verify {
        /// Run only the named suites.
        #[arg(long)]
        only: Vec<String>,
        /// Skip the suites that take minutes.
        #[arg(long)]
        skip_slow: bool,
        /// List the suites and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Front,
    Families,
    All,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::GenomeFormat(_) | Error::AlreadyExists(_) => EXIT_USAGE,
        Error::Core(metacell::core::Error::Config(_)) => EXIT_USAGE,
        Error::Design(kind) if infeasible(*kind) => EXIT_INFEASIBLE,
        _ => EXIT_FAILURE,
    }
}

/// Infeasible designs, as opposed to numerical failures.
fn infeasible(kind: FailureKind) -> bool {
    matches!(kind, FailureKind::DegenerateField | FailureKind::EmptyDesign | FailureKind::Disconnected)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).format_timestamp_secs().init();
    let result = match cli.command {
        Command::Run { config, seed, threads, output, force, dry_run } => {
            cmd_run(&config, seed, threads, output, force, dry_run)
        }
        Command::Eval { genome, symmetry, resolution, youngs_modulus, poisson_ratio, render, mesh } => {
            BaseMaterial::new(youngs_modulus, poisson_ratio)
                .map_err(Error::from)
                .and_then(|m| cmd_eval(&genome, symmetry, resolution, m, render.as_deref(), mesh.as_deref()))
        }
        Command::Export { archives, mode, out, threshold } => cmd_export(&archives, mode, &out, threshold),
        Command::Verify { only, skip_slow, list } => cmd_verify(&only, skip_slow, list),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn cmd_run(
    path: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    output: Option<PathBuf>,
    force: bool,
    dry_run: bool,
) -> Result<u8, Error> {
    let mut config = RunConfig::load(path)?;
    if let Some(s) = seed {
        config.evolution.seed = s;
    }
    if let Some(dir) = output {
        config.output_dir = dir;
    }
    let threads = threads.unwrap_or(0);
    if dry_run {
        let rows = config.parameter_table();
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            println!("{k:<width$}  {v}");
        }
        let cloud = PointCloud::new(config.symmetry, config.resolution)?;
        println!("{:<width$}  {n} x {n} points", "grid", n = cloud.resolution());
        let shown = if threads == 0 { "all cores".to_string() } else { threads.to_string() };
        println!("{:<width$}  {shown}", "threads");
        return Ok(0);
    }
    let dir = config.output_dir.clone();
    let outcome = runner::run(&config, &dir, &RunOptions { threads, force })?;
    let m = &outcome.manifest;
    println!("{} records written to {}", m.records, dir.join(&m.archive).display());
    for f in &m.fronts {
        println!("front: {}", dir.join(f).display());
    }
    Ok(0)
}

fn print_matrix(name: &str, c: &Matrix3) {
    for (i, row) in c.iter().enumerate() {
        let lead = if i == 0 { format!("{name} =") } else { String::new() };
        println!("{lead:<4} [{:>14.6e} {:>14.6e} {:>14.6e}]", row[0], row[1], row[2]);
    }
}

fn cmd_eval(
    path: &Path,
    tag: GroupTag,
    resolution: usize,
    material: BaseMaterial,
    svg: Option<&Path>,
    off: Option<&Path>,
) -> Result<u8, Error> {
    let genome = read_genome(path)?;
    let cloud = PointCloud::new(tag, resolution)?;
    println!(
        "genome {} ({} nodes, {} connections), {tag}, {n} x {n} grid",
        path.display(),
        genome.nodes().len(),
        genome.connections().len(),
        n = cloud.resolution()
    );
    let field = sample_field(&genome, &cloud, 0.5).map_err(|e| {
        if e == metacell::core::Error::DegenerateField {
            println!("empty design: the field is constant, so no material can be placed");
            println!("cv = {}", cloud.len());
        }
        Error::Design(FailureKind::of(&e))
    })?;
    let report = check_constraints(&field.labels, &cloud);
    println!(
        "material points {} of {}, interior components {}, x-connected {}, y-connected {}",
        field.material_count(),
        cloud.len(),
        report.interior_components,
        report.x_connected,
        report.y_connected
    );
    println!("cv = {}", report.violation);
    let mesh = build_mesh(&field, &cloud).map_err(|e| Error::Design(FailureKind::of(&e)))?;
    println!("volume fraction {:.6} ({} triangles)", mesh.volume_fraction(), mesh.triangles.len());
    if let Some(p) = svg {
        fs::write(p, render::svg(&mesh, cloud.lattice())).map_err(|e| Error::Io { path: p.into(), source: e })?;
        println!("wrote {}", p.display());
    }
    if let Some(p) = off {
        fs::write(p, render::off(&mesh)).map_err(|e| Error::Io { path: p.into(), source: e })?;
        println!("wrote {}", p.display());
    }
    let c = homogenized_stiffness(&mesh, &material).map_err(|e| Error::Design(FailureKind::of(&e)))?;
    print_matrix("C", &c);
    match ElasticTensor::from_stiffness(c) {
        Ok(t) => {
            print_matrix("S", &t.s);
            println!("E = {:.9}", t.e_avg);
            println!("nu = {:.9}", t.nu_avg);
        }
        Err(e) => println!("S undefined: {e}"),
    }
    Ok(if report.feasible() { 0 } else { EXIT_INFEASIBLE })
}

fn cmd_export(archives: &[PathBuf], mode: Mode, out: &Path, threshold: f64) -> Result<u8, Error> {
    let mut records = Vec::new();
    let mut corrupt = 0;
    for path in archives {
        let summary = ArchiveReader::open(path)?.read_all()?;
        if summary.truncated_tail {
            log::warn!("{}: ignoring an incomplete trailing record", path.display());
        }
        corrupt += summary.corrupt;
        records.extend(summary.records);
    }
    let total = records.len() + corrupt;
    if corrupt > 0 {
        eprintln!("warning: skipped {corrupt} corrupt record(s) of {total}");
    }
    if matches!(mode, Mode::Front | Mode::All) {
        for p in write_fronts(&records, out)? {
            println!("front: {}", p.display());
        }
    }
    if matches!(mode, Mode::Families | Mode::All) {
        let fam = write_families(&records, out, &SimilarityCoefficients::default(), threshold)?;
        println!("{} families", fam.families.len());
        for p in fam.files {
            println!("families: {}", p.display());
        }
    }
    if corrupt * 100 > total {
        eprintln!("error: more than 1% of the records were corrupt");
        return Ok(EXIT_FAILURE);
    }
    Ok(0)
}

fn cmd_verify(only: &[String], skip_slow: bool, list: bool) -> Result<u8, Error> {
    let all = verify::criteria();
    if list {
        for c in &all {
            println!("{:<24} {}{}", c.name, c.summary, if c.slow { " (slow)" } else { "" });
        }
        return Ok(0);
    }
    for name in only {
        if !all.iter().any(|c| c.name == name) {
            eprintln!("error: unknown suite `{name}` (see --list)");
            return Ok(EXIT_USAGE);
        }
    }
    let mut failed = 0;
    for c in all.iter().filter(|c| (only.is_empty() || only.iter().any(|n| n == c.name)) && !(skip_slow && c.slow)) {
        let outcome = verify::run(c);
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    Ok(if failed == 0 { 0 } else { EXIT_FAILURE })
}
