use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Activation, Genome, Marker, INPUT_X, INPUT_Y, OUTPUT};
use crate::Result;

/// A genome flattened into an evaluation plan in topological order.
#[derive(Debug, Clone)]
pub struct CompiledCppn {
    steps: Vec<Step>,
    slots: usize,
    x_slot: usize,
    y_slot: usize,
    out_slot: usize,
}

#[derive(Debug, Clone)]
struct Step {
    slot: usize,
    activation: Activation,
    bias: f64,
    inputs: Vec<(usize, f64)>,
}

impl CompiledCppn {
    pub fn new(genome: &Genome) -> Result<Self> {
        let order = genome.topological_order()?;
        let nodes = genome.nodes();
        let slot_of: BTreeMap<Marker, usize> = nodes.iter().enumerate().map(|(i, n)| (n.marker, i)).collect();
        let mut incoming: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); nodes.len()];
        for c in genome.connections().iter().filter(|c| c.enabled) {
            incoming[slot_of[&c.target]].push((slot_of[&c.source], c.weight));
        }
        let steps = order
            .into_iter()
            .filter(|&i| nodes[i].marker != INPUT_X && nodes[i].marker != INPUT_Y)
            .map(|i| Step {
                slot: i,
                activation: nodes[i].activation,
                bias: nodes[i].bias,
                inputs: core::mem::take(&mut incoming[i]),
            })
            .collect();
        Ok(CompiledCppn {
            steps,
            slots: nodes.len(),
            x_slot: slot_of[&INPUT_X],
            y_slot: slot_of[&INPUT_Y],
            out_slot: slot_of[&OUTPUT],
        })
    }

    fn run(&self, buf: &mut [f64], x: f64, y: f64) -> f64 {
        buf[self.x_slot] = x;
        buf[self.y_slot] = y;
        for step in &self.steps {
            let z = step.inputs.iter().fold(step.bias, |acc, &(s, w)| acc + w * buf[s]);
            buf[step.slot] = step.activation.apply(z);
        }
        buf[self.out_slot]
    }

    pub fn evaluate(&self, point: (f64, f64)) -> f64 {
        let mut buf = alloc::vec![0.0; self.slots];
        self.run(&mut buf, point.0, point.1)
    }

    pub fn evaluate_batch(&self, points: &[(f64, f64)]) -> Vec<f64> {
        let mut buf = alloc::vec![0.0; self.slots];
        points.iter().map(|&(x, y)| self.run(&mut buf, x, y)).collect()
    }
}

/// Output intensity of `genome` at `point`.
pub fn evaluate(genome: &Genome, point: (f64, f64)) -> Result<f64> {
    Ok(CompiledCppn::new(genome)?.evaluate(point))
}

/// Output intensity at every point, in order.
pub fn evaluate_batch(genome: &Genome, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    Ok(CompiledCppn::new(genome)?.evaluate_batch(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cppn::{ConnectionGene, NodeGene};
    use alloc::vec;

    fn io_nodes(out: Activation) -> Vec<NodeGene> {
        vec![NodeGene::input(INPUT_X), NodeGene::input(INPUT_Y), NodeGene::output(out, 0.0)]
    }

    fn conn(m: u64, s: Marker, t: Marker, w: f64) -> ConnectionGene {
        ConnectionGene { marker: Marker(m), source: s, target: t, weight: w, enabled: true }
    }

    #[test]
    fn empty_network_outputs_activation_of_bias() {
        let g = Genome::new(0, io_nodes(Activation::Linear), vec![]).unwrap();
        assert_eq!(evaluate(&g, (0.3, 0.7)).unwrap(), 0.0);
    }

    #[test]
    fn identity_passthrough() {
        let g = Genome::new(0, io_nodes(Activation::Linear), vec![conn(3, INPUT_X, OUTPUT, 1.0)]).unwrap();
        assert_eq!(evaluate(&g, (0.25, 0.9)).unwrap(), 0.25);
        assert_eq!(evaluate_batch(&g, &[(0.0, 0.0), (1.0, 0.0)]).unwrap(), vec![0.0, 1.0]);
        assert!(evaluate_batch(&g, &[]).unwrap().is_empty());
    }

    #[test]
    fn sine_hidden_node() {
        let mut nodes = io_nodes(Activation::Linear);
        nodes.push(NodeGene::hidden(Marker(5), Activation::Sine, 0.0));
        let conns = vec![conn(3, INPUT_X, Marker(5), 1.0), conn(4, Marker(5), OUTPUT, 1.0)];
        let g = Genome::new(0, nodes, conns).unwrap();
        let v = evaluate(&g, (core::f64::consts::FRAC_PI_2, 0.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disabled_connections_contribute_nothing() {
        let mut c = conn(3, INPUT_X, OUTPUT, 5.0);
        c.enabled = false;
        let g = Genome::new(0, io_nodes(Activation::Linear), vec![c, conn(4, INPUT_Y, OUTPUT, 2.0)]).unwrap();
        assert_eq!(evaluate(&g, (1.0, 0.5)).unwrap(), 1.0);
    }

    #[test]
    fn orphan_hidden_node_outputs_activation_of_bias() {
        let mut nodes = io_nodes(Activation::Linear);
        nodes.push(NodeGene::hidden(Marker(7), Activation::Gaussian, 0.0));
        let g = Genome::new(0, nodes, vec![conn(8, Marker(7), OUTPUT, 1.0)]).unwrap();
        assert_eq!(evaluate(&g, (3.0, 4.0)).unwrap(), 1.0);
    }
}
