//! Arrival processes, queue bookkeeping, and rate-stability metrics.
//!
//! The ledger keeps exact integer counts satisfying
//! `Q(t) = Q(0) + A(t) - D(t)` with `Q(0) = 0`.

use rand::Rng;

use crate::error::{Error, Result};

/// I.i.d. Bernoulli arrivals, at most one packet per link per slot.
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    rates: Vec<f64>,
}

impl ArrivalProcess {
    pub fn bernoulli(rates: Vec<f64>) -> Result<Self> {
        for (i, &a) in rates.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidRate { link: i, value: a });
            }
        }
        Ok(ArrivalProcess { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Per-slot arrival bound declared by this process.
    pub fn max_per_slot(&self) -> u32 {
        1
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Vec<u32> {
        self.rates
            .iter()
            .map(|&a| {
                if a >= 1.0 {
                    1
                } else if a <= 0.0 {
                    0
                } else {
                    rng.random_bool(a) as u32
                }
            })
            .collect()
    }
}

/// Cumulative arrivals, departures, and current queue lengths per link.
#[derive(Debug, Clone)]
pub struct QueueLedger {
    queues: Vec<u64>,
    arrived: Vec<u64>,
    departed: Vec<u64>,
    slots: u64,
}

impl QueueLedger {
    pub fn new(n: usize) -> QueueLedger {
        QueueLedger {
            queues: vec![0; n],
            arrived: vec![0; n],
            departed: vec![0; n],
            slots: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.queues.len()
    }

    pub fn slots(&self) -> u64 {
        self.slots
    }

    pub fn queues(&self) -> &[u64] {
        &self.queues
    }

    pub fn arrived(&self) -> &[u64] {
        &self.arrived
    }

    pub fn departed(&self) -> &[u64] {
        &self.departed
    }

    /// Records one slot's arrivals and advances the slot counter.
    pub fn record_arrivals(&mut self, arrivals: &[u32]) {
        assert_eq!(arrivals.len(), self.n());
        for (i, &k) in arrivals.iter().enumerate() {
            self.arrived[i] += u64::from(k);
            self.queues[i] += u64::from(k);
        }
        self.slots += 1;
    }

    /// A link departs one packet iff it transmitted successfully and had a
    /// packet queued. Empty-queue transmissions are allowed but deliver
    /// nothing. Returns the departure vector.
    pub fn apply_service(&mut self, successes: &[bool]) -> Vec<u32> {
        assert_eq!(successes.len(), self.n());
        let mut departures = vec![0u32; self.n()];
        for i in 0..self.n() {
            if successes[i] && self.queues[i] > 0 {
                self.queues[i] -= 1;
                self.departed[i] += 1;
                departures[i] = 1;
            }
        }
        departures
    }

    /// Empirical arrival rates `A(t) / t`; zeros before the first slot.
    pub fn empirical_rates(&self) -> Vec<f64> {
        if self.slots == 0 {
            return vec![0.0; self.n()];
        }
        let t = self.slots as f64;
        self.arrived.iter().map(|&a| a as f64 / t).collect()
    }

    /// `max_i |D_i(t)/t - a_i|` against the declared rates.
    pub fn rate_stability_gap(&self, rates: &[f64]) -> Result<f64> {
        assert_eq!(rates.len(), self.n());
        if self.slots == 0 {
            return Err(Error::EmptyLedger);
        }
        let t = self.slots as f64;
        Ok(self
            .departed
            .iter()
            .zip(rates)
            .map(|(&d, &a)| (d as f64 / t - a).abs())
            .fold(0.0, f64::max))
    }

    /// The ledger identity `Q = A - D`, which must hold exactly.
    pub fn identity_holds(&self) -> bool {
        (0..self.n()).all(|i| self.queues[i] + self.departed[i] == self.arrived[i])
    }

    pub fn max_queue(&self) -> u64 {
        self.queues.iter().copied().max().unwrap_or(0)
    }

    pub fn total_queue(&self) -> u64 {
        self.queues.iter().sum()
    }
}
