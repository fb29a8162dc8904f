//! The common interface shared by learned and classical auctions.

use serde::{Deserialize, Serialize};

use crate::auction::metrics::utility;
use crate::error::{check_len, Result};

/// Allocation (`alloc[n][m]`, probability that bidder `n` receives unit `m`)
/// and per-bidder payments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub alloc: Vec<Vec<f64>>,
    pub payments: Vec<f64>,
}

pub type AuctionOutcome = Outcome;
pub type MechanismOutcome = Outcome;

impl Outcome {
    pub fn empty(n_bidders: usize, n_units: usize) -> Self {
        Self {
            alloc: vec![vec![0.0; n_units]; n_bidders],
            payments: vec![0.0; n_bidders],
        }
    }

    pub fn n_bidders(&self) -> usize {
        self.payments.len()
    }

    pub fn n_units(&self) -> usize {
        self.alloc.first().map_or(0, Vec::len)
    }

    /// Expected number of units bidder `n` receives.
    pub fn units_won(&self, n: usize) -> f64 {
        self.alloc[n].iter().sum()
    }

    pub fn revenue(&self) -> f64 {
        crate::auction::metrics::revenue(&self.payments)
    }

    pub fn utility_of(&self, n: usize, value: f64) -> f64 {
        utility(value, &self.alloc[n], self.payments[n])
    }

    /// Column sums, one per unit.
    pub fn unit_totals(&self) -> Vec<f64> {
        (0..self.n_units())
            .map(|m| self.alloc.iter().map(|row| row[m]).sum())
            .collect()
    }

    /// Column sums at most one (plus `tol`), entries in [0, 1], payments
    /// finite and nonnegative.
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.alloc.len() == self.payments.len()
            && self.alloc.iter().flatten().all(|z| (0.0..=1.0).contains(z))
            && self.unit_totals().iter().all(|&s| s <= 1.0 + tol)
            && self.payments.iter().all(|p| p.is_finite() && *p >= 0.0)
    }
}

/// Any rule mapping a bid vector to an outcome.
pub trait Mechanism {
    fn n_bidders(&self) -> usize;
    fn n_units(&self) -> usize;
    fn run(&self, bids: &[f64]) -> Result<Outcome>;

    /// Utility of bidder `n` with true value `value` when bids are `bids`.
    fn utility(&self, value: f64, bids: &[f64], n: usize) -> Result<f64> {
        Ok(self.run(bids)?.utility_of(n, value))
    }

    fn check_bids(&self, bids: &[f64]) -> Result<()> {
        check_len("bid vector", self.n_bidders(), bids.len())
    }
}

/// Mechanisms whose utility can be differentiated with respect to one's own bid.
pub trait DifferentiableMechanism: Mechanism {
    /// Returns `(u_n, d u_n / d bids[n])` for true value `value`.
    fn utility_and_grad(&self, value: f64, bids: &[f64], n: usize) -> Result<(f64, f64)>;
}

/// Adapts a closure into a [`Mechanism`].
pub struct FnMechanism<F> {
    n_bidders: usize,
    n_units: usize,
    rule: F,
}

impl<F> FnMechanism<F>
where
    F: Fn(&[f64]) -> Outcome,
{
    pub fn new(n_bidders: usize, n_units: usize, rule: F) -> Self {
        Self {
            n_bidders,
            n_units,
            rule,
        }
    }
}

impl<F> Mechanism for FnMechanism<F>
where
    F: Fn(&[f64]) -> Outcome,
{
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }

    fn n_units(&self) -> usize {
        self.n_units
    }

    fn run(&self, bids: &[f64]) -> Result<Outcome> {
        self.check_bids(bids)?;
        Ok((self.rule)(bids))
    }
}
