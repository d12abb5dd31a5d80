//! Gossip average consensus over the interference graph.
//!
//! Each round draws a random maximal matching of the conflict edges and
//! every matched pair replaces both values with their mean. Pairwise
//! averaging preserves the sum, so on a connected graph all copies contract
//! to the global average.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::topology::InterferenceGraph;

/// Per-link local copies of one tracked scalar.
pub type GossipValues = Vec<f64>;

/// Greedy matching over a shuffled edge list: an edge joins the matching iff
/// both endpoints are still free, so the result is maximal by construction.
pub fn random_maximal_matching(g: &InterferenceGraph, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = g.edges().to_vec();
    edges.shuffle(rng);
    let mut used = 0u64;
    let mut matching = Vec::new();
    for (i, j) in edges {
        let pair = (1u64 << i) | (1u64 << j);
        if used & pair == 0 {
            used |= pair;
            matching.push((i, j));
        }
    }
    matching
}

/// One averaging sweep: matched pairs take their mean, everyone else keeps
/// their value. The matching edges must be disjoint.
pub fn gossip_round(values: &mut [f64], matching: &[(usize, usize)]) {
    for &(i, j) in matching {
        let mean = 0.5 * (values[i] + values[j]);
        values[i] = mean;
        values[j] = mean;
    }
}

/// Runs `rounds` gossip rounds in place, one fresh matching per round.
pub fn run_consensus(
    g: &InterferenceGraph,
    values: &mut [f64],
    rounds: usize,
    rng: &mut impl Rng,
) {
    for _ in 0..rounds {
        let matching = random_maximal_matching(g, rng);
        gossip_round(values, &matching);
    }
}

/// Spread of the local copies: `max - min`.
pub fn disagreement(values: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Rounds needed to bring the disagreement below `tol`, or `None` if the
/// budget runs out first. Used to record per-topology convergence budgets.
pub fn rounds_until_agreement(
    g: &InterferenceGraph,
    values: &mut [f64],
    tol: f64,
    max_rounds: usize,
    rng: &mut impl Rng,
) -> Option<usize> {
    for round in 0..=max_rounds {
        if disagreement(values) < tol {
            return Some(round);
        }
        if round == max_rounds {
            break;
        }
        let matching = random_maximal_matching(g, rng);
        gossip_round(values, &matching);
    }
    None
}
