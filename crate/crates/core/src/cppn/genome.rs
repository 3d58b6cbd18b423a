use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use super::Activation;
use crate::{Error, Result};

/// Global historical marker of a gene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Marker(pub u64);

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Marker of the `x` input node. Fixed for every genome.
pub const INPUT_X: Marker = Marker(0);
/// Marker of the `y` input node.
pub const INPUT_Y: Marker = Marker(1);
/// Marker of the single output node.
pub const OUTPUT: Marker = Marker(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NodeKind {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGene {
    pub marker: Marker,
    pub kind: NodeKind,
    pub activation: Activation,
    pub bias: f64,
}

impl NodeGene {
    pub fn input(marker: Marker) -> Self {
        NodeGene { marker, kind: NodeKind::Input, activation: Activation::Linear, bias: 0.0 }
    }

    pub fn hidden(marker: Marker, activation: Activation, bias: f64) -> Self {
        NodeGene { marker, kind: NodeKind::Hidden, activation, bias }
    }

    pub fn output(activation: Activation, bias: f64) -> Self {
        NodeGene { marker: OUTPUT, kind: NodeKind::Output, activation, bias }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionGene {
    pub marker: Marker,
    pub source: Marker,
    pub target: Marker,
    pub weight: f64,
    pub enabled: bool,
}

impl ConnectionGene {
    /// An enabled connection.
    pub fn new(marker: Marker, source: Marker, target: Marker, weight: f64) -> Self {
        ConnectionGene { marker, source, target, weight, enabled: true }
    }
}

/// A CPPN genotype: node genes and connection genes, both sorted by marker.
///
/// Construction validates the structural invariants: both inputs and exactly
/// one output are present, inputs are identity nodes without incoming
/// connections, markers are unique, connections reference existing nodes,
/// `(source, target)` pairs are unique, there are no self loops, and the
/// enabled subgraph is acyclic.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    id: u64,
    nodes: Vec<NodeGene>,
    connections: Vec<ConnectionGene>,
}

impl Genome {
    pub fn new(id: u64, mut nodes: Vec<NodeGene>, mut connections: Vec<ConnectionGene>) -> Result<Self> {
        nodes.sort_by_key(|n| n.marker);
        connections.sort_by_key(|c| c.marker);
        let genome = Genome { id, nodes, connections };
        genome.validate()?;
        Ok(genome)
    }

    /// Builds a genome whose structure is known to be valid except for
    /// possible cycles, which the caller repairs.
    pub(crate) fn from_sorted_unchecked(id: u64, nodes: Vec<NodeGene>, connections: Vec<ConnectionGene>) -> Self {
        debug_assert!(nodes.windows(2).all(|w| w[0].marker < w[1].marker));
        debug_assert!(connections.windows(2).all(|w| w[0].marker < w[1].marker));
        Genome { id, nodes, connections }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = id;
        self
    }

    pub fn nodes(&self) -> &[NodeGene] {
        &self.nodes
    }

    pub fn connections(&self) -> &[ConnectionGene] {
        &self.connections
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut Vec<NodeGene> {
        &mut self.nodes
    }

    pub(crate) fn connections_mut(&mut self) -> &mut Vec<ConnectionGene> {
        &mut self.connections
    }

    pub fn node(&self, marker: Marker) -> Option<&NodeGene> {
        self.nodes.binary_search_by_key(&marker, |n| n.marker).ok().map(|i| &self.nodes[i])
    }

    pub fn connection(&self, marker: Marker) -> Option<&ConnectionGene> {
        self.connections
            .binary_search_by_key(&marker, |c| c.marker)
            .ok()
            .map(|i| &self.connections[i])
    }

    pub fn has_pair(&self, source: Marker, target: Marker) -> bool {
        self.connections.iter().any(|c| c.source == source && c.target == target)
    }

    /// Total number of genes (nodes plus connections).
    pub fn gene_count(&self) -> usize {
        self.nodes.len() + self.connections.len()
    }

    /// Largest marker over all genes.
    pub fn max_marker(&self) -> Marker {
        let n = self.nodes.last().map(|n| n.marker);
        let c = self.connections.last().map(|c| c.marker);
        n.max(c).unwrap_or(Marker(0))
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count()
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: alloc::string::String| Err(Error::InvalidGenome(msg));
        let mut markers = BTreeSet::new();
        for n in &self.nodes {
            if !markers.insert(n.marker) {
                return invalid(format!("duplicate marker {}", n.marker));
            }
            match n.kind {
                NodeKind::Input => {
                    if n.marker != INPUT_X && n.marker != INPUT_Y {
                        return invalid(format!("input node with marker {}", n.marker));
                    }
                    if n.activation != Activation::Linear || n.bias != 0.0 {
                        return invalid(format!("input node {} must be linear with zero bias", n.marker));
                    }
                }
                NodeKind::Output => {
                    if n.marker != OUTPUT {
                        return invalid(format!("output node with marker {}", n.marker));
                    }
                }
                NodeKind::Hidden => {
                    if n.marker <= OUTPUT {
                        return invalid(format!("hidden node with reserved marker {}", n.marker));
                    }
                }
            }
            if !n.bias.is_finite() {
                return invalid(format!("non-finite bias on node {}", n.marker));
            }
        }
        for required in [INPUT_X, INPUT_Y, OUTPUT] {
            if self.node(required).is_none() {
                return invalid(format!("missing node {required}"));
            }
        }
        let mut pairs = BTreeSet::new();
        for c in &self.connections {
            if !markers.insert(c.marker) {
                return invalid(format!("duplicate marker {}", c.marker));
            }
            let Some(target) = self.node(c.target) else {
                return invalid(format!("connection {} targets missing node {}", c.marker, c.target));
            };
            if self.node(c.source).is_none() {
                return invalid(format!("connection {} starts at missing node {}", c.marker, c.source));
            }
            if target.kind == NodeKind::Input {
                return invalid(format!("connection {} feeds input node {}", c.marker, c.target));
            }
            if c.source == c.target {
                return invalid(format!("connection {} is a self loop", c.marker));
            }
            if !pairs.insert((c.source, c.target)) {
                return invalid(format!("duplicate connection {} -> {}", c.source, c.target));
            }
            if !c.weight.is_finite() {
                return invalid(format!("non-finite weight on connection {}", c.marker));
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Node indices in a topological order of the enabled subgraph
    /// (Kahn's algorithm, ties broken by marker).
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let index: BTreeMap<Marker, usize> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.marker, i)).collect();
        let n = self.nodes.len();
        let mut indegree = alloc::vec![0usize; n];
        let mut out: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for c in self.connections.iter().filter(|c| c.enabled) {
            let (s, t) = (index[&c.source], index[&c.target]);
            out[s].push(t);
            indegree[t] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &t in &out[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.insert(t);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
            return Err(Error::Cycle(self.nodes[stuck].marker));
        }
        Ok(order)
    }

    /// Disables cycle-forming connections until the enabled subgraph is a DAG.
    /// On each detected cycle the connection with the largest source marker
    /// (then largest own marker) is disabled.
    pub(crate) fn repair_cycles(&mut self) {
        while let Some(cycle) = self.find_enabled_cycle() {
            let victim = cycle
                .iter()
                .copied()
                .max_by_key(|&ci| (self.connections[ci].source, self.connections[ci].marker))
                .expect("cycle is non-empty");
            self.connections[victim].enabled = false;
        }
    }

    /// Returns connection indices along one enabled cycle, if any.
    fn find_enabled_cycle(&self) -> Option<Vec<usize>> {
        let index: BTreeMap<Marker, usize> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.marker, i)).collect();
        let n = self.nodes.len();
        let mut out: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
        for (ci, c) in self.connections.iter().enumerate().filter(|(_, c)| c.enabled) {
            out[index[&c.source]].push((index[&c.target], ci));
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = alloc::vec![0u8; n];
        let mut via: Vec<Option<(usize, usize)>> = alloc::vec![None; n];
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = alloc::vec![(root, 0)];
            state[root] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next < out[node].len() {
                    let (t, ci) = out[node][*next];
                    *next += 1;
                    match state[t] {
                        0 => {
                            state[t] = 1;
                            via[t] = Some((node, ci));
                            stack.push((t, 0));
                        }
                        1 => {
                            let mut cycle = alloc::vec![ci];
                            let mut cur = node;
                            while cur != t {
                                let (prev, pci) = via[cur].expect("stack node has a parent");
                                cycle.push(pci);
                                cur = prev;
                            }
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// True if `target` can reach `source` through any connection, enabled or
    /// not. Adding `source -> target` would then close a cycle.
    pub(crate) fn reaches(&self, from: Marker, to: Marker) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![from];
        while let Some(m) = stack.pop() {
            if m == to {
                return true;
            }
            if !seen.insert(m) {
                continue;
            }
            stack.extend(self.connections.iter().filter(|c| c.source == m).map(|c| c.target));
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn conn(marker: u64, s: Marker, t: Marker, w: f64) -> ConnectionGene {
        ConnectionGene { marker: Marker(marker), source: s, target: t, weight: w, enabled: true }
    }

    fn base_nodes() -> Vec<NodeGene> {
        vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(Activation::Linear, 0.0)]
    }

    #[test]
    fn rejects_missing_output() {
        let nodes = vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y)];
        assert!(matches!(Genome::new(0, nodes, vec![]), Err(Error::InvalidGenome(_))));
    }

    #[test]
    fn rejects_connection_into_input() {
        let err = Genome::new(0, base_nodes(), vec![conn(3, OUTPUT, INPUT_X, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidGenome(_)));
    }

    #[test]
    fn rejects_cycles_and_duplicates() {
        let mut nodes = base_nodes();
        nodes.push(NodeGene::hidden(Marker(10), Activation::Sine, 0.0));
        nodes.push(NodeGene::hidden(Marker(11), Activation::Sine, 0.0));
        let cyc = vec![conn(12, Marker(10), Marker(11), 1.0), conn(13, Marker(11), Marker(10), 1.0)];
        assert!(matches!(Genome::new(0, nodes.clone(), cyc), Err(Error::Cycle(_))));
        let dup = vec![conn(12, INPUT_X, OUTPUT, 1.0), conn(13, INPUT_X, OUTPUT, 1.0)];
        assert!(matches!(Genome::new(0, nodes.clone(), dup), Err(Error::InvalidGenome(_))));
        let self_loop = vec![conn(12, Marker(10), Marker(10), 1.0)];
        assert!(Genome::new(0, nodes, self_loop).is_err());
    }

    #[test]
    fn disabled_back_edge_is_not_a_cycle() {
        let mut nodes = base_nodes();
        nodes.push(NodeGene::hidden(Marker(10), Activation::Sine, 0.0));
        let mut back = conn(13, OUTPUT, Marker(10), 1.0);
        back.enabled = false;
        let conns = vec![conn(12, Marker(10), OUTPUT, 1.0), back];
        assert!(Genome::new(0, nodes, conns).is_ok());
    }

    #[test]
    fn repair_disables_largest_source_marker() {
        let mut nodes = base_nodes();
        nodes.push(NodeGene::hidden(Marker(10), Activation::Sine, 0.0));
        nodes.push(NodeGene::hidden(Marker(11), Activation::Sine, 0.0));
        let conns = vec![
            conn(12, Marker(10), Marker(11), 1.0),
            conn(13, Marker(11), Marker(10), 1.0),
            conn(14, Marker(11), OUTPUT, 1.0),
        ];
        let mut g = Genome::from_sorted_unchecked(0, nodes, conns);
        g.repair_cycles();
        assert!(g.validate().is_ok());
        assert!(g.connection(Marker(12)).unwrap().enabled);
        assert!(!g.connection(Marker(13)).unwrap().enabled);
    }
}
