use alloc::vec::Vec;

use rand::Rng;

use super::genome::{ConnectionGene, Genome, Marker, NodeGene, NodeKind, INPUT_X, INPUT_Y, OUTPUT};
use super::{Activation, InnovationRegistry};
use crate::rng::standard_normal;

/// Per-gene and per-genome mutation probabilities.
///
/// Parameter rates (`weight`, `bias`, `activation`) apply independently to
/// every eligible gene; structural rates apply at most once per call.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MutationRates {
    /// Probability that a connection weight is mutated.
    pub weight: f64,
    /// Standard deviation of Gaussian weight and bias perturbation.
    pub perturb_sigma: f64,
    /// Share of parameter mutations that reset instead of perturb.
    pub replace_probability: f64,
    /// Resets draw uniformly from `[-replace_range, replace_range]`.
    pub replace_range: f64,
    /// Probability that a non-input node bias is mutated.
    pub bias: f64,
    /// Probability that a non-input node activation is replaced.
    pub activation: f64,
    pub add_connection: f64,
    pub add_node: f64,
    pub remove_connection: f64,
    pub remove_node: f64,
    /// Activation menu for new hidden nodes, initial outputs and replacements.
    pub activations: Vec<Activation>,
}

impl Default for MutationRates {
    fn default() -> Self {
        MutationRates {
            weight: 0.2,
            perturb_sigma: 0.5,
            replace_probability: 0.1,
            replace_range: 3.0,
            bias: 0.2,
            activation: 0.5,
            add_connection: 0.1,
            add_node: 0.05,
            remove_connection: 0.05,
            remove_node: 0.02,
            activations: Activation::SEARCH.to_vec(),
        }
    }
}

impl MutationRates {
    /// All probabilities zero: mutation becomes the identity.
    pub fn none() -> Self {
        MutationRates {
            weight: 0.0,
            bias: 0.0,
            activation: 0.0,
            add_connection: 0.0,
            add_node: 0.0,
            remove_connection: 0.0,
            remove_node: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let probs = [
            ("weight", self.weight),
            ("replace_probability", self.replace_probability),
            ("bias", self.bias),
            ("activation", self.activation),
            ("add_connection", self.add_connection),
            ("add_node", self.add_node),
            ("remove_connection", self.remove_connection),
            ("remove_node", self.remove_node),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(crate::Error::Config(alloc::format!("mutation.{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.perturb_sigma >= 0.0 && self.replace_range >= 0.0) {
            return Err(crate::Error::Config("mutation.perturb_sigma and replace_range must be >= 0".into()));
        }
        if self.activations.is_empty() {
            return Err(crate::Error::Config("mutation.activations must not be empty".into()));
        }
        Ok(())
    }

    fn pick_activation<R: Rng + ?Sized>(&self, rng: &mut R) -> Activation {
        self.activations[rng.random_range(0..self.activations.len())]
    }
}

/// A randomized starting genome: both inputs wired straight to the output
/// with weights uniform in `[-1, 1]`, a uniform bias in `[-1, 1]`, an output
/// activation drawn from the menu, and no hidden nodes.
pub fn initial_genome<R: Rng + ?Sized>(
    id: u64,
    registry: &mut InnovationRegistry,
    rates: &MutationRates,
    rng: &mut R,
) -> Genome {
    let activation = rates.pick_activation(rng);
    let bias = rng.random_range(-1.0..=1.0);
    let nodes = alloc::vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(activation, bias)];
    let connections = [INPUT_X, INPUT_Y]
        .into_iter()
        .map(|source| ConnectionGene {
            marker: registry.connection(source, OUTPUT),
            source,
            target: OUTPUT,
            weight: rng.random_range(-1.0..=1.0),
            enabled: true,
        })
        .collect();
    Genome::new(id, nodes, connections).expect("initial genome is valid")
}

fn mutate_parameter<R: Rng + ?Sized>(value: f64, rates: &MutationRates, rng: &mut R) -> f64 {
    if rng.random::<f64>() < rates.replace_probability {
        rng.random_range(-rates.replace_range..=rates.replace_range)
    } else {
        value + rates.perturb_sigma * standard_normal(rng)
    }
}

/// Returns a mutated copy of `genome`. Mutations that cannot apply (no legal
/// connection left, nothing to remove) are skipped.
pub fn mutate<R: Rng + ?Sized>(
    genome: &Genome,
    registry: &mut InnovationRegistry,
    rates: &MutationRates,
    rng: &mut R,
) -> Genome {
    let mut g = genome.clone();
    if rng.random::<f64>() < rates.add_node {
        add_node(&mut g, registry, rates, rng);
    }
    if rng.random::<f64>() < rates.add_connection {
        add_connection(&mut g, registry, rng);
    }
    if rng.random::<f64>() < rates.remove_connection && !g.connections().is_empty() {
        let i = rng.random_range(0..g.connections().len());
        g.connections_mut().remove(i);
    }
    if rng.random::<f64>() < rates.remove_node {
        remove_node(&mut g, rng);
    }
    for c in g.connections_mut() {
        if rng.random::<f64>() < rates.weight {
            c.weight = mutate_parameter(c.weight, rates, rng);
        }
    }
    for n in g.nodes_mut().iter_mut().filter(|n| n.kind != NodeKind::Input) {
        if rng.random::<f64>() < rates.bias {
            n.bias = mutate_parameter(n.bias, rates, rng);
        }
        if rng.random::<f64>() < rates.activation && rates.activations.len() > 1 {
            let others: Vec<Activation> = rates.activations.iter().copied().filter(|a| *a != n.activation).collect();
            if !others.is_empty() {
                n.activation = others[rng.random_range(0..others.len())];
            }
        }
    }
    debug_assert!(g.validate().is_ok());
    g
}

/// Splits a random enabled connection `s -> t (w)` into `s -> h (1)` and
/// `h -> t (w)`, disabling the original.
fn add_node<R: Rng + ?Sized>(g: &mut Genome, registry: &mut InnovationRegistry, rates: &MutationRates, rng: &mut R) {
    let enabled: Vec<usize> = (0..g.connections().len()).filter(|&i| g.connections()[i].enabled).collect();
    if enabled.is_empty() {
        return;
    }
    let ci = enabled[rng.random_range(0..enabled.len())];
    let old = g.connections()[ci];
    let hidden = registry.split(old.marker);
    if g.node(hidden).is_some() {
        return;
    }
    let activation = rates.pick_activation(rng);
    let m_in = registry.connection(old.source, hidden);
    let m_out = registry.connection(hidden, old.target);
    g.connections_mut()[ci].enabled = false;
    insert_sorted_node(g, NodeGene::hidden(hidden, activation, 0.0));
    insert_sorted_connection(
        g,
        ConnectionGene { marker: m_in, source: old.source, target: hidden, weight: 1.0, enabled: true },
    );
    insert_sorted_connection(
        g,
        ConnectionGene { marker: m_out, source: hidden, target: old.target, weight: old.weight, enabled: true },
    );
}

fn add_connection<R: Rng + ?Sized>(g: &mut Genome, registry: &mut InnovationRegistry, rng: &mut R) {
    let sources: Vec<Marker> = g.nodes().iter().filter(|n| n.kind != NodeKind::Output).map(|n| n.marker).collect();
    let targets: Vec<Marker> = g.nodes().iter().filter(|n| n.kind != NodeKind::Input).map(|n| n.marker).collect();
    let mut candidates = Vec::new();
    for &s in &sources {
        for &t in &targets {
            if s != t && !g.has_pair(s, t) && !g.reaches(t, s) {
                candidates.push((s, t));
            }
        }
    }
    if candidates.is_empty() {
        return;
    }
    let (source, target) = candidates[rng.random_range(0..candidates.len())];
    let marker = registry.connection(source, target);
    if g.connection(marker).is_some() {
        return;
    }
    let weight = rng.random_range(-1.0..=1.0);
    insert_sorted_connection(g, ConnectionGene { marker, source, target, weight, enabled: true });
}

fn remove_node<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R) {
    let hidden: Vec<Marker> = g.nodes().iter().filter(|n| n.kind == NodeKind::Hidden).map(|n| n.marker).collect();
    if hidden.is_empty() {
        return;
    }
    let victim = hidden[rng.random_range(0..hidden.len())];
    g.nodes_mut().retain(|n| n.marker != victim);
    g.connections_mut().retain(|c| c.source != victim && c.target != victim);
}

fn insert_sorted_node(g: &mut Genome, node: NodeGene) {
    let nodes = g.nodes_mut();
    let at = nodes.partition_point(|n| n.marker < node.marker);
    nodes.insert(at, node);
}

fn insert_sorted_connection(g: &mut Genome, conn: ConnectionGene) {
    let conns = g.connections_mut();
    let at = conns.partition_point(|c| c.marker < conn.marker);
    conns.insert(at, conn);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn rng(i: u64) -> crate::rng::StreamRng {
        stream(42, Purpose::Auxiliary, 0, i)
    }

    #[test]
    fn zero_rates_are_identity() {
        let mut reg = InnovationRegistry::new();
        let g = initial_genome(1, &mut reg, &MutationRates::default(), &mut rng(0));
        let m = mutate(&g, &mut reg, &MutationRates::none(), &mut rng(1));
        assert_eq!(g, m);
    }

    #[test]
    fn node_split_rewires_with_unit_and_original_weight() {
        let mut reg = InnovationRegistry::new();
        let g = initial_genome(1, &mut reg, &MutationRates::default(), &mut rng(0));
        let rates = MutationRates { add_node: 1.0, ..MutationRates::none() };
        // Try streams until the x -> out connection is the one split.
        let x_out = reg.connection(INPUT_X, OUTPUT);
        let w = g.connection(x_out).unwrap().weight;
        let m = (0..64)
            .map(|i| mutate(&g, &mut reg, &rates, &mut rng(100 + i)))
            .find(|m| !m.connection(x_out).unwrap().enabled)
            .expect("some stream splits x -> out");
        let h = reg.split(x_out);
        assert_eq!(m.node(h).unwrap().kind, NodeKind::Hidden);
        let cin = m.connection(reg.connection(INPUT_X, h)).unwrap();
        let cout = m.connection(reg.connection(h, OUTPUT)).unwrap();
        assert_eq!((cin.weight, cout.weight), (1.0, w));
        assert!(cin.enabled && cout.enabled);
    }

    #[test]
    fn parallel_innovations_share_markers() {
        let mut reg = InnovationRegistry::new();
        let rates = MutationRates { add_node: 1.0, ..MutationRates::none() };
        let a = initial_genome(1, &mut reg, &rates, &mut rng(1));
        let b = initial_genome(2, &mut reg, &rates, &mut rng(2));
        let before = reg.next_marker();
        // Split the same connection in two unrelated genomes.
        let x_out = reg.connection(INPUT_X, OUTPUT);
        let split = |g: &Genome, reg: &mut InnovationRegistry| {
            (0..64)
                .map(|i| mutate(g, reg, &rates, &mut rng(200 + i)))
                .find(|m| !m.connection(x_out).unwrap().enabled)
                .unwrap()
        };
        let ma = split(&a, &mut reg);
        let mb = split(&b, &mut reg);
        let ha: Vec<Marker> = ma.nodes().iter().filter(|n| n.kind == NodeKind::Hidden).map(|n| n.marker).collect();
        let hb: Vec<Marker> = mb.nodes().iter().filter(|n| n.kind == NodeKind::Hidden).map(|n| n.marker).collect();
        assert_eq!(ha, hb);
        assert!(ha[0] >= before);
    }

    #[test]
    fn structural_mutation_keeps_invariants() {
        let mut reg = InnovationRegistry::new();
        let rates = MutationRates {
            add_node: 0.5,
            add_connection: 0.5,
            remove_connection: 0.1,
            remove_node: 0.1,
            ..MutationRates::default()
        };
        let mut g = initial_genome(1, &mut reg, &rates, &mut rng(0));
        for i in 0..300 {
            g = mutate(&g, &mut reg, &rates, &mut rng(i + 1));
            g.validate().unwrap();
        }
    }
}
