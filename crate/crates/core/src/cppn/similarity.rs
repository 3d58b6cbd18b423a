use super::genome::{Genome, Marker, NodeKind};

/// Coefficients of the genetic distance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SimilarityCoefficients {
    /// Weight of the excess-gene fraction.
    pub excess: f64,
    /// Weight of the disjoint-gene fraction.
    pub disjoint: f64,
    /// Weight of the mean parameter difference of matching genes.
    pub weight: f64,
    /// Add the mean bias difference of matching non-input nodes to the
    /// mean weight difference of matching connections.
    pub include_biases: bool,
}

impl Default for SimilarityCoefficients {
    fn default() -> Self {
        SimilarityCoefficients { excess: 0.5, disjoint: 0.5, weight: 1.0, include_biases: true }
    }
}

#[derive(Default)]
struct Tally {
    excess: usize,
    disjoint: usize,
    diff_sum: f64,
    matched: usize,
}

/// Walks two marker-sorted gene lists, counting excess and disjoint genes and
/// accumulating `|param_a - param_b|` over matches.
fn tally<T>(a: &[T], b: &[T], key: impl Fn(&T) -> Marker, param: impl Fn(&T) -> f64, max_a: Marker, max_b: Marker, t: &mut Tally) {
    let (mut i, mut j) = (0, 0);
    let unmatched = |m: Marker, other_max: Marker, t: &mut Tally| {
        if m > other_max {
            t.excess += 1;
        } else {
            t.disjoint += 1;
        }
    };
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if key(x) == key(y) => {
                t.diff_sum += libm::fabs(param(x) - param(y));
                t.matched += 1;
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if key(x) < key(y) => {
                unmatched(key(x), max_b, t);
                i += 1;
            }
            (Some(_), Some(y)) => {
                unmatched(key(y), max_a, t);
                j += 1;
            }
            (Some(x), None) => {
                unmatched(key(x), max_b, t);
                i += 1;
            }
            (None, Some(y)) => {
                unmatched(key(y), max_a, t);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Genetic distance between two genomes.
///
/// Genes (nodes and connections, disabled ones included) are aligned by
/// marker. Unmatched genes beyond the other genome's largest marker are
/// excess, the remaining unmatched genes are disjoint. Both counts are
/// normalized by the gene count of the larger genome. The parameter term is
/// the mean absolute weight difference of matching connections, plus (when
/// enabled) the mean absolute bias difference of matching non-input nodes.
pub fn similarity(a: &Genome, b: &Genome, coeffs: &SimilarityCoefficients) -> f64 {
    let (max_a, max_b) = (a.max_marker(), b.max_marker());
    let mut conn = Tally::default();
    tally(a.connections(), b.connections(), |c| c.marker, |c| c.weight, max_a, max_b, &mut conn);

    let mut node = Tally::default();
    tally(a.nodes(), b.nodes(), |n| n.marker, |n| n.bias, max_a, max_b, &mut node);
    // Inputs are fixed identity nodes; they count as genes but carry no bias.
    let inputs = a.nodes().iter().filter(|n| n.kind == NodeKind::Input).count();
    let node_matched = node.matched.saturating_sub(inputs);

    let n_gene = a.gene_count().max(b.gene_count()).max(1) as f64;
    let excess = (conn.excess + node.excess) as f64;
    let disjoint = (conn.disjoint + node.disjoint) as f64;
    let mut w_bar = if conn.matched > 0 { conn.diff_sum / conn.matched as f64 } else { 0.0 };
    if coeffs.include_biases && node_matched > 0 {
        w_bar += node.diff_sum / node_matched as f64;
    }
    coeffs.excess * excess / n_gene + coeffs.disjoint * disjoint / n_gene + coeffs.weight * w_bar
}
