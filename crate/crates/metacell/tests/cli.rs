use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn metacell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metacell"))
        .args(args)
        .env_remove("METACELL_THREADS")
        .env_remove("METACELL_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TINY: &str = r#"
run_id = "cli"
symmetry = "p4mm"
resolution = 15

[evolution]
population_size = 10
max_generations = 2
seed = 5
"#;

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(metacell(&[]).status.code(), Some(1));
    assert_eq!(metacell(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(metacell(&["eval", "missing.json", "--symmetry", "p7"]).status.code(), Some(1));
    assert_eq!(metacell(&["verify", "--only", "no-such-suite"]).status.code(), Some(1));
    assert_eq!(metacell(&["--help"]).status.code(), Some(0));
}

#[test]
fn eval_prints_a_finite_tensor_for_the_laminate() {
    let o = metacell(&["eval", example("laminate.json").to_str().unwrap()]);
    let text = stdout(&o);
    // A single stripe does not percolate across the stripes.
    assert_eq!(o.status.code(), Some(2), "{text}");
    assert!(text.contains("C ="), "{text}");
    assert!(!text.to_lowercase().contains("nan"), "{text}");
    assert!(text.contains("35 x 35"), "{text}");
}

#[test]
fn eval_of_an_empty_design_exits_with_two() {
    let o = metacell(&["eval", example("empty.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("empty design"));
}

#[test]
fn eval_accepts_a_finer_grid() {
    let o = metacell(&["eval", example("laminate.json").to_str().unwrap(), "--resolution", "70"]);
    assert!(stdout(&o).contains("70 x 70"), "{}", stdout(&o));
    let o = metacell(&["eval", example("laminate.json").to_str().unwrap(), "--resolution", "70", "--symmetry", "p4"]);
    assert!(stdout(&o).contains("71 x 71"), "{}", stdout(&o));
}

#[test]
fn eval_renders_valid_svg_and_off() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("cell.svg");
    let off = dir.path().join("cell.off");
    metacell(&[
        "eval",
        example("laminate.json").to_str().unwrap(),
        "--symmetry",
        "p31m",
        "--render",
        svg.to_str().unwrap(),
        "--mesh",
        off.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let ids: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("path"))
        .map(|n| n.attribute("id").unwrap_or(""))
        .collect();
    assert_eq!(ids, ["cell", "tessellation"]);
    let mesh = fs::read_to_string(&off).unwrap();
    let mut lines = mesh.lines();
    assert_eq!(lines.next(), Some("OFF"));
    let counts: Vec<usize> = lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert!(counts[0] > 0 && counts[1] > 0);
    assert_eq!(mesh.lines().count(), 2 + counts[0] + counts[1]);
}

#[test]
fn dry_run_prints_parameters_without_writing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = metacell(&["run", example("p4_small.toml").to_str().unwrap(), "--dry-run", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("p4"), "{text}");
    assert!(text.contains("21 x 21"), "{text}");
    assert!(!out.exists());
}

#[test]
fn bad_configs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "resolution = 21\nunknown_key = 3\n").unwrap();
    assert_eq!(metacell(&["run", bad.to_str().unwrap(), "--dry-run"]).status.code(), Some(1));
    fs::write(&bad, "[evolution]\nobjectives = 3\n").unwrap();
    assert_eq!(metacell(&["run", bad.to_str().unwrap(), "--dry-run"]).status.code(), Some(1));
}

#[test]
fn run_then_export() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("tiny.toml");
    fs::write(&config, TINY).unwrap();
    let out = dir.path().join("run");
    let args = ["run", config.to_str().unwrap(), "--output", out.to_str().unwrap(), "--threads", "1"];
    let o = metacell(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("archive.mca").exists());

    let again = metacell(&args);
    assert_eq!(again.status.code(), Some(1));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(metacell(&forced).status.code(), Some(0));

    let export = dir.path().join("export");
    let o = metacell(&["export", out.join("archive.mca").to_str().unwrap(), "--out", export.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(export.join("front_max-e_min-nu.csv").exists());
    assert!(export.join("families.csv").exists());
    assert!(export.join("family_summary.csv").exists());
    assert!(export.join("families.json.gz").exists());
}

#[test]
fn export_of_a_missing_archive_fails() {
    let dir = TempDir::new().unwrap();
    let o = metacell(&["export", dir.path().join("nope.mca").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_lists_every_suite() {
    let o = metacell(&["verify", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 12);
    let o = metacell(&["verify", "--only", "apd-values"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS apd-values"));
}
