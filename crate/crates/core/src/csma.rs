//! Discrete-time CSMA sampling over independent sets.
//!
//! One chain step draws a random decision schedule, then every link in it
//! with no transmitting neighbor re-draws its on/off state from a logistic
//! activation probability. The resulting chain is time reversible with a
//! product-form stationary distribution; the exact-chain utilities here let
//! tests verify that claim instead of assuming it.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::topology::{
    enumerate_independent_sets, InterferenceGraph, Schedule, DEFAULT_ENUMERATION_CAP,
};

/// `exp(f) / (1 + exp(f))`, evaluated stably on both tails.
pub fn activation_probability(fugacity: f64) -> f64 {
    if fugacity >= 0.0 {
        1.0 / (1.0 + (-fugacity).exp())
    } else {
        let e = fugacity.exp();
        e / (1.0 + e)
    }
}

/// How the per-slot decision schedule is generated: every link proposes
/// independently with probability `q`, then each conflicting pair keeps only
/// its lower-index proposer (edges scanned in sorted order). Every link has
/// positive probability of surviving into the decision schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRule {
    proposal_prob: f64,
}

impl DecisionRule {
    pub fn new(proposal_prob: f64) -> Result<Self> {
        if !(proposal_prob > 0.0 && proposal_prob <= 1.0) {
            return Err(Error::InvalidActivationProb(proposal_prob));
        }
        Ok(DecisionRule { proposal_prob })
    }

    pub fn proposal_prob(&self) -> f64 {
        self.proposal_prob
    }
}

impl Default for DecisionRule {
    fn default() -> Self {
        DecisionRule {
            proposal_prob: 0.25,
        }
    }
}

/// Drops the higher-index endpoint of every conflicting pair, scanning the
/// (sorted) edge list once. Because drops are permanent, the survivor set is
/// independent.
fn resolve_proposals(g: &InterferenceGraph, proposals: u64) -> u64 {
    let mut mask = proposals;
    for &(i, j) in g.edges() {
        if mask & (1 << i) != 0 && mask & (1 << j) != 0 {
            mask &= !(1 << j);
        }
    }
    mask
}

/// Draws one decision schedule, i.i.d. across calls.
pub fn generate_decision_schedule(
    g: &InterferenceGraph,
    rule: &DecisionRule,
    rng: &mut impl Rng,
) -> Schedule {
    let mut proposals = 0u64;
    for i in 0..g.n() {
        if rng.random_bool(rule.proposal_prob) {
            proposals |= 1 << i;
        }
    }
    Schedule::from_mask(g, resolve_proposals(g, proposals))
        .expect("conflict resolution yields an independent set")
}

/// Exact distribution of the decision schedule, by enumerating all `2^n`
/// proposal outcomes. Desk-scale verification utility.
pub fn decision_schedule_distribution(
    g: &InterferenceGraph,
    rule: &DecisionRule,
) -> Result<Vec<(Schedule, f64)>> {
    let n = g.n();
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let q = rule.proposal_prob;
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for proposals in 0..(1u64 << n) {
        let k = proposals.count_ones() as i32;
        let prob = q.powi(k) * (1.0 - q).powi(n as i32 - k);
        *acc.entry(resolve_proposals(g, proposals)).or_insert(0.0) += prob;
    }
    Ok(acc
        .into_iter()
        .map(|(mask, p)| {
            (
                Schedule::from_mask(g, mask).expect("resolved proposals are independent"),
                p,
            )
        })
        .collect())
}

/// One Gibbs update. Links in the decision schedule with a transmitting
/// neighbor in `prev` stay silent; the others re-draw from the logistic
/// probability of their fugacity. Links outside the decision schedule keep
/// their previous state. Coins are drawn in ascending link order.
pub fn gibbs_step(
    g: &InterferenceGraph,
    prev: &Schedule,
    fugacities: &[f64],
    decision: &Schedule,
    rng: &mut impl Rng,
) -> Schedule {
    assert_eq!(fugacities.len(), g.n());
    assert_eq!(prev.n(), g.n());
    assert_eq!(decision.n(), g.n());
    let mut next = prev.mask();
    for i in decision.links() {
        if g.neighbors_mask(i) & prev.mask() != 0 {
            // blocked; it was already silent since prev is independent
            next &= !(1 << i);
        } else if rng.random_bool(activation_probability(fugacities[i])) {
            next |= 1 << i;
        } else {
            next &= !(1 << i);
        }
    }
    Schedule::from_mask(g, next).expect("single-site updates preserve independence")
}

/// Chain state: the current transmitting set plus per-link fugacities.
#[derive(Debug, Clone)]
pub struct CsmaState {
    pub schedule: Schedule,
    pub fugacities: Vec<f64>,
}

impl CsmaState {
    /// Starts from the all-idle schedule.
    pub fn new(g: &InterferenceGraph, fugacities: Vec<f64>) -> Result<Self> {
        if fugacities.len() != g.n() {
            return Err(Error::LengthMismatch {
                expected: g.n(),
                got: fugacities.len(),
            });
        }
        Ok(CsmaState {
            schedule: Schedule::empty(g.n()),
            fugacities,
        })
    }

    /// One full slot: decision schedule, then the Gibbs update.
    pub fn step(&mut self, g: &InterferenceGraph, rule: &DecisionRule, rng: &mut impl Rng) {
        let decision = generate_decision_schedule(g, rule, rng);
        self.schedule = gibbs_step(g, &self.schedule, &self.fugacities, &decision, rng);
    }
}

/// Product-form distribution over the full independent-set family:
/// `x_sigma = exp(f^T sigma - A(f))` with `A` the log-partition function.
#[derive(Debug, Clone)]
pub struct ProductForm {
    pub sets: Vec<Schedule>,
    pub probs: Vec<f64>,
    pub log_partition: f64,
}

impl ProductForm {
    /// Index of a schedule in `sets` (which are in ascending mask order).
    pub fn position(&self, mask: u64) -> Option<usize> {
        self.sets.binary_search_by_key(&mask, |s| s.mask()).ok()
    }
}

pub fn product_form_distribution(g: &InterferenceGraph, fugacities: &[f64]) -> Result<ProductForm> {
    if fugacities.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: fugacities.len(),
        });
    }
    let sets = enumerate_independent_sets(g)?;
    let weights: Vec<f64> = sets.iter().map(|s| s.weight(fugacities)).collect();
    // max-shift to keep the exponentials in range
    let shift = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = weights.iter().map(|w| (w - shift).exp()).sum();
    let log_partition = shift + sum.ln();
    let probs = weights.iter().map(|w| (w - log_partition).exp()).collect();
    Ok(ProductForm {
        sets,
        probs,
        log_partition,
    })
}

/// One-slot transition matrix of the chain, marginalized exactly over
/// decision schedules and activation coins.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub sets: Vec<Schedule>,
    /// Row-major `m x m`; entry `(i, j)` is the probability of moving from
    /// `sets[i]` to `sets[j]` in one slot.
    pub p: Vec<f64>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.dim();
        &self.p[i * m..(i + 1) * m]
    }

    /// Stationary left eigenvector, normalized to sum 1, by a direct solve
    /// of the balance equations.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let m = self.dim();
        // (P^T - I) pi = 0 with the last balance row replaced by sum(pi) = 1.
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = self.p[j * m + i] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..m {
            a[(m - 1) * m + j] = 1.0;
        }
        let mut b = vec![0.0; m];
        b[m - 1] = 1.0;
        Ok(Lu::factor(&a, m)?.solve(&b))
    }
}

pub fn exact_transition_matrix(
    g: &InterferenceGraph,
    fugacities: &[f64],
    rule: &DecisionRule,
) -> Result<TransitionMatrix> {
    if fugacities.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: fugacities.len(),
        });
    }
    let sets = enumerate_independent_sets(g)?;
    let decisions = decision_schedule_distribution(g, rule)?;
    let act: Vec<f64> = fugacities
        .iter()
        .map(|&f| activation_probability(f))
        .collect();
    let m = sets.len();
    let mut p = vec![0.0; m * m];
    for (decision, d_prob) in &decisions {
        let d = decision.mask();
        for (si, s) in sets.iter().enumerate() {
            // split the decision schedule into blocked and free links
            let mut blocked = 0u64;
            for i in decision.links() {
                if g.neighbors_mask(i) & s.mask() != 0 {
                    blocked |= 1 << i;
                }
            }
            let free = d & !blocked;
            for (sj, next) in sets.iter().enumerate() {
                // off-decision links keep their state; blocked links stay 0
                if (s.mask() ^ next.mask()) & !d != 0 || next.mask() & blocked != 0 {
                    continue;
                }
                let mut w = *d_prob;
                let mut rest = free;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    w *= if next.contains(i) { act[i] } else { 1.0 - act[i] };
                }
                p[si * m + sj] += w;
            }
        }
    }
    Ok(TransitionMatrix { sets, p })
}

/// Monte Carlo run of the chain from the all-idle state.
#[derive(Debug, Clone)]
pub struct ChainRun {
    /// Schedule after each slot, `slots` entries.
    pub trace: Vec<Schedule>,
    /// Visit counts keyed by schedule mask.
    pub visits: BTreeMap<u64, u64>,
    pub slots: u64,
}

impl ChainRun {
    /// Empirical probabilities aligned with the given set list.
    pub fn empirical_distribution(&self, sets: &[Schedule]) -> Vec<f64> {
        let total = self.slots.max(1) as f64;
        sets.iter()
            .map(|s| *self.visits.get(&s.mask()).unwrap_or(&0) as f64 / total)
            .collect()
    }
}

pub fn run_chain(
    g: &InterferenceGraph,
    fugacities: &[f64],
    rule: &DecisionRule,
    slots: u64,
    rng: &mut impl Rng,
) -> Result<ChainRun> {
    let mut state = CsmaState::new(g, fugacities.to_vec())?;
    let mut trace = Vec::with_capacity(slots as usize);
    let mut visits: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..slots {
        state.step(g, rule, rng);
        *visits.entry(state.schedule.mask()).or_insert(0) += 1;
        trace.push(state.schedule);
    }
    Ok(ChainRun {
        trace,
        visits,
        slots,
    })
}

/// Writes a chain trace as `slot,schedule` CSV rows.
pub fn write_chain_trace_csv(run: &ChainRun, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "slot,schedule")?;
    for (t, s) in run.trace.iter().enumerate() {
        writeln!(out, "{},{}", t + 1, s.to_bitstring())?;
    }
    Ok(())
}

/// Total-variation distance `0.5 * sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
