//! Run configuration, read from TOML or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use metacell_core::cppn::MutationRates;
use metacell_core::geometry::{GroupTag, DEFAULT_THRESHOLD};
use metacell_core::homogenization::{BaseMaterial, Objective, Property};
use metacell_core::moea::RveaConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Everything needed to reproduce a run. Omitted fields take the defaults of
/// the reference setup: p31m cells on a 35 x 35 grid, population 500 for 800
/// generations, maximizing E while minimizing Poisson's ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form run name stored in every archive record.
    pub run_id: String,
    pub symmetry: GroupTag,
    pub resolution: usize,
    pub threshold: f64,
    pub objectives: Vec<Objective>,
    pub material: BaseMaterial,
    pub evolution: RveaConfig,
    pub mutation: MutationRates,
    /// Relative to the working directory; `METACELL_OUTPUT_DIR` overrides it.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run_id: "run".into(),
            symmetry: GroupTag::P31m,
            resolution: 35,
            threshold: DEFAULT_THRESHOLD,
            objectives: vec![Objective::maximize(Property::E), Objective::minimize(Property::Nu)],
            material: BaseMaterial::default(),
            evolution: RveaConfig::default(),
            mutation: MutationRates::default(),
            output_dir: PathBuf::from("metacell-out"),
        }
    }
}

impl RunConfig {
    /// Parses `path` as TOML, or as JSON when the extension is `.json` or
    /// TOML parsing fails on a file that looks like JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let config = Self::parse(&text, path)?;
        config.validate().map_err(|e| Error::Config { path: path.into(), message: e.to_string() })?;
        Ok(config)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |message: String| Error::Config { path: path.into(), message };
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
            || text.trim_start().starts_with('{');
        if json {
            serde_json::from_str(text).map_err(|e| err(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| err(e.to_string()))
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config = Self::parse(text, Path::new("<inline>"))?;
        config
            .validate()
            .map_err(|e| Error::Config { path: "<inline>".into(), message: e.to_string() })?;
        Ok(config)
    }

    pub fn validate(&self) -> metacell_core::Result<()> {
        use metacell_core::Error::Config;
        if self.run_id.is_empty() || self.run_id.len() > u16::MAX as usize {
            return Err(Config("run_id must be a non-empty string".into()));
        }
        if self.resolution < 3 {
            return Err(Config("resolution must be at least 3".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Config("threshold must lie in (0, 1)".into()));
        }
        if self.objectives.len() != self.evolution.objectives {
            return Err(Config(format!(
                "evolution.objectives is {} but {} objectives are listed",
                self.evolution.objectives,
                self.objectives.len()
            )));
        }
        self.material.validate()?;
        self.evolution.validate()?;
        self.mutation.validate()
    }

    /// Key/value rows describing the resolved configuration.
    pub fn parameter_table(&self) -> Vec<(String, String)> {
        let e = &self.evolution;
        let m = &self.mutation;
        let objectives: Vec<String> = self.objectives.iter().map(Objective::label).collect();
        let activations: Vec<&str> = m.activations.iter().map(|a| a.name()).collect();
        let rows: Vec<(&str, String)> = vec![
            ("run_id", self.run_id.clone()),
            ("symmetry", self.symmetry.name().into()),
            ("resolution", self.resolution.to_string()),
            ("threshold", self.threshold.to_string()),
            ("objectives", objectives.join(", ")),
            ("material.youngs_modulus", self.material.youngs_modulus.to_string()),
            ("material.poisson_ratio", self.material.poisson_ratio.to_string()),
            ("evolution.population_size", e.population_size.to_string()),
            ("evolution.max_generations", e.max_generations.to_string()),
            ("evolution.alpha", e.alpha.to_string()),
            ("evolution.adaptation_interval", e.adaptation_interval.to_string()),
            ("evolution.reference_vectors", e.reference_vectors.unwrap_or(e.population_size).to_string()),
            ("evolution.seed", e.seed.to_string()),
            ("mutation.weight", m.weight.to_string()),
            ("mutation.bias", m.bias.to_string()),
            ("mutation.activation", m.activation.to_string()),
            ("mutation.perturb_sigma", m.perturb_sigma.to_string()),
            ("mutation.add_connection", m.add_connection.to_string()),
            ("mutation.add_node", m.add_node.to_string()),
            ("mutation.remove_connection", m.remove_connection.to_string()),
            ("mutation.remove_node", m.remove_node.to_string()),
            ("mutation.activations", activations.join(", ")),
            ("output_dir", self.output_dir.display().to_string()),
        ];
        rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
