//! Classical mechanisms used as benchmarks and as oracles.
//!
//! Bidders have one per-unit value and additive utility over units. Ties go
//! to the lowest bidder index everywhere.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market::{sample_row, MarketConfig, ValuationSource};
use crate::mechanism::{DifferentiableMechanism, Mechanism, Outcome};
use crate::rng::rng_from;

fn check_bids(bids: &[f64]) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::Config("at least one bidder required".into()));
    }
    if let Some(b) = bids.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::Domain(format!(
            "bids must be finite and >= 0, got {b}"
        )));
    }
    Ok(())
}

/// Index of the highest bid, lowest index among ties.
fn top_bidder(bids: &[f64]) -> usize {
    let mut best = 0;
    for (i, &b) in bids.iter().enumerate().skip(1) {
        if b > bids[best] {
            best = i;
        }
    }
    best
}

/// Highest bid among everyone except `skip` (0 when nobody else bids).
fn best_other(bids: &[f64], skip: usize) -> f64 {
    bids.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &b)| b)
        .fold(0.0, f64::max)
}

/// Welfare-maximizing allocation of `n_units` identical units with VCG
/// payments. Without caps every unit goes to the top bidder, who pays
/// `n_units` times the second-highest bid.
pub fn vcg_multiunit(bids: &[f64], n_units: usize) -> Result<Outcome> {
    vcg_capped(bids, n_units, None)
}

/// VCG where each bidder can use at most `unit_cap` units.
pub fn vcg_capped(bids: &[f64], n_units: usize, unit_cap: Option<usize>) -> Result<Outcome> {
    check_bids(bids)?;
    if unit_cap == Some(0) {
        return Err(Error::Config("unit_cap must be >= 1".into()));
    }
    let counts = greedy_counts(bids, n_units, unit_cap, None);
    let welfare: f64 = counts.iter().zip(bids).map(|(&c, &b)| c as f64 * b).sum();
    let mut out = Outcome::empty(bids.len(), n_units);
    let mut unit = 0;
    for (n, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            out.alloc[n][unit] = 1.0;
            unit += 1;
        }
        if c > 0 {
            let without: Vec<usize> = greedy_counts(bids, n_units, unit_cap, Some(n));
            let welfare_without: f64 = without.iter().zip(bids).map(|(&k, &b)| k as f64 * b).sum();
            let others_with = welfare - c as f64 * bids[n];
            out.payments[n] = (welfare_without - others_with).max(0.0);
        }
    }
    Ok(out)
}

/// Units per bidder under greedy allocation by descending bid; `exclude`
/// removes one bidder. Zero bids receive nothing.
fn greedy_counts(
    bids: &[f64],
    n_units: usize,
    unit_cap: Option<usize>,
    exclude: Option<usize>,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).filter(|&i| Some(i) != exclude).collect();
    // stable sort keeps lowest index first among equal bids
    order.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]));
    let mut counts = vec![0; bids.len()];
    let mut remaining = n_units;
    for i in order {
        if remaining == 0 {
            break;
        }
        if bids[i] <= 0.0 && exclude.is_none() && i != top_bidder(bids) {
            continue;
        }
        let take = unit_cap.map_or(remaining, |c| c.min(remaining));
        counts[i] = take;
        remaining -= take;
    }
    counts
}

pub fn second_price_single(bids: &[f64]) -> Result<Outcome> {
    check_bids(bids)?;
    let w = top_bidder(bids);
    let mut out = Outcome::empty(bids.len(), 1);
    out.alloc[w][0] = 1.0;
    out.payments[w] = best_other(bids, w);
    Ok(out)
}

pub fn first_price_single(bids: &[f64]) -> Result<Outcome> {
    check_bids(bids)?;
    let w = top_bidder(bids);
    let mut out = Outcome::empty(bids.len(), 1);
    out.alloc[w][0] = 1.0;
    out.payments[w] = bids[w];
    Ok(out)
}

/// Second price with a reserve: no sale below the reserve, otherwise the
/// winner pays `max(reserve, second-highest bid)`.
pub fn myerson_uniform_single(bids: &[f64], reserve: f64) -> Result<Outcome> {
    check_bids(bids)?;
    if !(0.0..=1.0).contains(&reserve) {
        return Err(Error::Config(format!(
            "reserve must lie in [0, 1], got {reserve}"
        )));
    }
    let w = top_bidder(bids);
    let mut out = Outcome::empty(bids.len(), 1);
    if bids[w] >= reserve {
        out.alloc[w][0] = 1.0;
        out.payments[w] = reserve.max(best_other(bids, w));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vcg {
    pub n_bidders: usize,
    pub n_units: usize,
    pub unit_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondPrice {
    pub n_bidders: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPrice {
    pub n_bidders: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MyersonReserve {
    pub n_bidders: usize,
    pub reserve: f64,
}

impl Mechanism for Vcg {
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }
    fn n_units(&self) -> usize {
        self.n_units
    }
    fn run(&self, bids: &[f64]) -> Result<Outcome> {
        self.check_bids(bids)?;
        vcg_capped(bids, self.n_units, self.unit_cap)
    }
}

impl Mechanism for SecondPrice {
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }
    fn n_units(&self) -> usize {
        1
    }
    fn run(&self, bids: &[f64]) -> Result<Outcome> {
        self.check_bids(bids)?;
        second_price_single(bids)
    }
}

impl Mechanism for FirstPrice {
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }
    fn n_units(&self) -> usize {
        1
    }
    fn run(&self, bids: &[f64]) -> Result<Outcome> {
        self.check_bids(bids)?;
        first_price_single(bids)
    }
}

/// Piecewise derivative: a winner loses one unit of utility per unit of bid.
impl DifferentiableMechanism for FirstPrice {
    fn utility_and_grad(&self, value: f64, bids: &[f64], n: usize) -> Result<(f64, f64)> {
        let out = self.run(bids)?;
        let won = out.alloc[n][0] > 0.0;
        Ok((out.utility_of(n, value), if won { -1.0 } else { 0.0 }))
    }
}

impl Mechanism for MyersonReserve {
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }
    fn n_units(&self) -> usize {
        1
    }
    fn run(&self, bids: &[f64]) -> Result<Outcome> {
        self.check_bids(bids)?;
        myerson_uniform_single(bids, self.reserve)
    }
}

/// Baselines selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Vcg,
    SecondPrice,
    FirstPrice,
    Myerson,
}

impl BaselineKind {
    pub const NAMES: [&'static str; 4] = ["vcg", "second-price", "first-price", "myerson"];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "vcg" => Ok(Self::Vcg),
            "second-price" => Ok(Self::SecondPrice),
            "first-price" => Ok(Self::FirstPrice),
            "myerson" => Ok(Self::Myerson),
            other => Err(Error::Config(format!(
                "unknown mechanism '{other}', expected one of: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    /// Instantiates the mechanism; `myerson` uses the uniform-[0, 1] reserve 1/2.
    pub fn build(self, n_bidders: usize, n_units: usize) -> Box<dyn Mechanism> {
        match self {
            Self::Vcg => Box::new(Vcg {
                n_bidders,
                n_units,
                unit_cap: None,
            }),
            Self::SecondPrice => Box::new(SecondPrice { n_bidders }),
            Self::FirstPrice => Box::new(FirstPrice { n_bidders }),
            Self::Myerson => Box::new(MyersonReserve {
                n_bidders,
                reserve: 0.5,
            }),
        }
    }
}

/// Source of truthful valuation profiles for Monte Carlo evaluation.
pub trait ValuationSampler {
    fn n_bidders(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
}

pub struct UniformSampler {
    pub n_bidders: usize,
}

impl ValuationSampler for UniformSampler {
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok((0..self.n_bidders).map(|_| rng.gen::<f64>()).collect())
    }
}

pub struct ConstantSampler(pub Vec<f64>);

impl ValuationSampler for ConstantSampler {
    fn n_bidders(&self) -> usize {
        self.0.len()
    }
    fn sample(&self, _rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

/// Draws from a market configuration (latency model or uniform source).
pub struct MarketSampler {
    pub config: MarketConfig,
}

impl MarketSampler {
    pub fn new(config: MarketConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }
}

impl ValuationSampler for MarketSampler {
    fn n_bidders(&self) -> usize {
        self.config.n_bidders()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        match self.config.source {
            ValuationSource::Uniform { n_bidders } => {
                Ok((0..n_bidders).map(|_| rng.gen::<f64>()).collect())
            }
            ValuationSource::Latency => Ok(sample_row(&self.config, rng)?
                .into_iter()
                .map(|d| d.valuation)
                .collect()),
        }
    }
}

/// Mean truthful revenue over `n_samples` draws.
pub fn expected_revenue_mc(
    mechanism: &dyn Mechanism,
    sampler: &dyn ValuationSampler,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be >= 1".into()));
    }
    let mut rng = rng_from(seed);
    let mut total = 0.0;
    for _ in 0..n_samples {
        let values = sampler.sample(&mut rng)?;
        total += mechanism.run(&values)?.revenue();
    }
    Ok(total / n_samples as f64)
}
