use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng;

use super::genome::{ConnectionGene, Genome, Marker, NodeGene};

/// Probability that a gene disabled in either parent stays disabled.
const INHERIT_DISABLED: f64 = 0.75;

/// Union crossover aligned by historical marker.
///
/// Matching genes take their parameters from either parent with equal
/// probability; unmatched genes are copied from whichever parent carries them.
/// Cycles introduced by the union are repaired by disabling connections.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, child_id: u64, rng: &mut R) -> Genome {
    let mut nodes: BTreeMap<Marker, NodeGene> = BTreeMap::new();
    for n in a.nodes() {
        let gene = match b.node(n.marker) {
            Some(m) if rng.random::<bool>() => *m,
            _ => *n,
        };
        nodes.insert(n.marker, gene);
    }
    for n in b.nodes() {
        nodes.entry(n.marker).or_insert(*n);
    }

    let mut conns: BTreeMap<Marker, ConnectionGene> = BTreeMap::new();
    for c in a.connections() {
        let gene = match b.connection(c.marker) {
            Some(m) => {
                let mut g = if rng.random::<bool>() { *m } else { *c };
                g.enabled = if !c.enabled || !m.enabled { rng.random::<f64>() >= INHERIT_DISABLED } else { true };
                g
            }
            None => *c,
        };
        conns.insert(c.marker, gene);
    }
    for c in b.connections() {
        conns.entry(c.marker).or_insert(*c);
    }

    // The registry keys markers by endpoint pair, so duplicate pairs only
    // appear with genomes imported from elsewhere; keep the oldest marker.
    let mut pairs = BTreeSet::new();
    let connections: Vec<ConnectionGene> =
        conns.into_values().filter(|c| pairs.insert((c.source, c.target))).collect();

    let mut child = Genome::from_sorted_unchecked(child_id, nodes.into_values().collect(), connections);
    child.repair_cycles();
    debug_assert!(child.validate().is_ok());
    child
}
