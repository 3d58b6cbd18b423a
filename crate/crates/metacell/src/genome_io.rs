//! JSON genome files.
//!
//! ```json
//! {"version": 1, "id": 4,
//!  "nodes": [[0, "input", "linear", 0.0], [2, "output", "sine", 0.1]],
//!  "connections": [[3, 0, 2, 0.8, true]]}
//! ```

use std::fs;
use std::path::Path;

use metacell_core::cppn::{Activation, ConnectionGene, Genome, Marker, NodeGene, NodeKind};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const GENOME_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenomeRecord {
    pub version: u32,
    pub id: u64,
    pub nodes: Vec<(u64, NodeKind, Activation, f64)>,
    pub connections: Vec<(u64, u64, u64, f64, bool)>,
}

impl From<&Genome> for GenomeRecord {
    fn from(g: &Genome) -> Self {
        GenomeRecord {
            version: GENOME_FORMAT_VERSION,
            id: g.id(),
            nodes: g.nodes().iter().map(|n| (n.marker.0, n.kind, n.activation, n.bias)).collect(),
            connections: g
                .connections()
                .iter()
                .map(|c| (c.marker.0, c.source.0, c.target.0, c.weight, c.enabled))
                .collect(),
        }
    }
}

impl TryFrom<GenomeRecord> for Genome {
    type Error = Error;

    fn try_from(r: GenomeRecord) -> Result<Genome> {
        if r.version != GENOME_FORMAT_VERSION {
            return Err(Error::GenomeFormat(format!("unsupported version {}", r.version)));
        }
        let nodes = r
            .nodes
            .into_iter()
            .map(|(m, kind, activation, bias)| NodeGene { marker: Marker(m), kind, activation, bias })
            .collect();
        let connections = r
            .connections
            .into_iter()
            .map(|(m, s, t, weight, enabled)| ConnectionGene {
                marker: Marker(m),
                source: Marker(s),
                target: Marker(t),
                weight,
                enabled,
            })
            .collect();
        Genome::new(r.id, nodes, connections).map_err(|e| Error::GenomeFormat(e.to_string()))
    }
}

pub fn to_json(genome: &Genome) -> String {
    serde_json::to_string(&GenomeRecord::from(genome)).expect("genome records always serialize")
}

pub fn from_json(text: &str) -> Result<Genome> {
    let record: GenomeRecord = serde_json::from_str(text).map_err(|e| Error::GenomeFormat(e.to_string()))?;
    record.try_into()
}

pub fn read_genome(path: &Path) -> Result<Genome> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    from_json(&text)
}

pub fn write_genome(path: &Path, genome: &Genome) -> Result<()> {
    let text = serde_json::to_string_pretty(&GenomeRecord::from(genome))?;
    fs::write(path, text + "\n").map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use metacell_core::cppn::{INPUT_X, INPUT_Y, OUTPUT};

    #[test]
    fn round_trip_is_exact() {
        let g = Genome::new(
            9,
            vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(Activation::Gaussian, 0.1 + 0.2)],
            vec![ConnectionGene::new(Marker(3), INPUT_X, OUTPUT, -1.0 / 3.0)],
        )
        .unwrap();
        assert_eq!(from_json(&to_json(&g)).unwrap(), g);
    }

    #[test]
    fn rejects_structural_errors_and_unknown_versions() {
        let cyclic = r#"{"version":1,"id":0,"nodes":[[0,"input","linear",0],[1,"input","linear",0],[2,"output","linear",0]],
            "connections":[[3,2,2,1.0,true]]}"#;
        assert!(matches!(from_json(cyclic), Err(Error::GenomeFormat(_))));
        let future = r#"{"version":2,"id":0,"nodes":[],"connections":[]}"#;
        assert!(from_json(future).unwrap_err().to_string().contains("version 2"));
    }
}
