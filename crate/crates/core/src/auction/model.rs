use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mechanism::{DifferentiableMechanism, Mechanism, Outcome};
use crate::nn::{Activation, DenseNet, Gradients, Trace};
use crate::rng::{derive_seed, stream};

/// How payments are produced from the payment network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaymentMode {
    /// `p_n = softplus(o_n)`; IR is left to the loss.
    #[default]
    Penalty,
    /// `p_n = sigmoid(o_n) * b_n * (units won by n)`; IR holds by construction.
    Structural,
}

/// Hidden-layer layout shared by both networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetArch {
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
}

impl Default for NetArch {
    fn default() -> Self {
        Self {
            hidden_layers: vec![100, 100],
            activation: Activation::Tanh,
        }
    }
}

/// Allocation network (`N -> (N + 1) * M` logits, unit-major, the last slot
/// of every unit being "unallocated") and payment network (`N -> N`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionModel {
    pub n_bidders: usize,
    pub n_units: usize,
    pub payment_mode: PaymentMode,
    pub alloc_net: DenseNet,
    pub pay_net: DenseNet,
}

/// Everything a forward pass produced, kept for the reverse pass.
#[derive(Debug, Clone)]
pub struct ModelPass {
    pub bids: Vec<f64>,
    alloc_trace: Trace,
    pay_trace: Trace,
    /// `softmax[m]` over the `N + 1` slots of unit `m`.
    softmax: Vec<Vec<f64>>,
    pub outcome: Outcome,
}

impl ModelPass {
    /// Raw payment-network output after its output activation.
    fn pay_out(&self) -> &[f64] {
        self.pay_trace.output()
    }
}

impl AuctionModel {
    pub fn new(
        n_bidders: usize,
        n_units: usize,
        arch: &NetArch,
        payment_mode: PaymentMode,
        seed: u64,
    ) -> Result<Self> {
        let (alloc_sizes, pay_sizes) = Self::layer_sizes(n_bidders, n_units, arch)?;
        Ok(Self {
            n_bidders,
            n_units,
            payment_mode,
            alloc_net: DenseNet::new(
                &alloc_sizes,
                arch.activation,
                Activation::Linear,
                derive_seed(seed, stream::ALLOC_INIT),
            )?,
            pay_net: DenseNet::new(
                &pay_sizes,
                arch.activation,
                Self::pay_activation(payment_mode),
                derive_seed(seed, stream::PAY_INIT),
            )?,
        })
    }

    /// Model with every parameter zero: uniform allocation, constant payments.
    pub fn zeros(
        n_bidders: usize,
        n_units: usize,
        arch: &NetArch,
        payment_mode: PaymentMode,
    ) -> Result<Self> {
        let (alloc_sizes, pay_sizes) = Self::layer_sizes(n_bidders, n_units, arch)?;
        Ok(Self {
            n_bidders,
            n_units,
            payment_mode,
            alloc_net: DenseNet::zeros(&alloc_sizes, arch.activation, Activation::Linear)?,
            pay_net: DenseNet::zeros(
                &pay_sizes,
                arch.activation,
                Self::pay_activation(payment_mode),
            )?,
        })
    }

    fn pay_activation(mode: PaymentMode) -> Activation {
        match mode {
            PaymentMode::Penalty => Activation::Softplus,
            PaymentMode::Structural => Activation::Sigmoid,
        }
    }

    fn layer_sizes(
        n_bidders: usize,
        n_units: usize,
        arch: &NetArch,
    ) -> Result<(Vec<usize>, Vec<usize>)> {
        if n_bidders < 1 || n_units < 1 {
            return Err(Error::Config(format!(
                "auction needs >= 1 bidder and unit, got {n_bidders} and {n_units}"
            )));
        }
        let mut alloc = vec![n_bidders];
        alloc.extend(&arch.hidden_layers);
        alloc.push((n_bidders + 1) * n_units);
        let mut pay = vec![n_bidders];
        pay.extend(&arch.hidden_layers);
        pay.push(n_bidders);
        Ok((alloc, pay))
    }

    /// Checks that network shapes agree with `n_bidders`, `n_units` and the payment mode.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_bidders;
        check_len("alloc_net input", n, self.alloc_net.input_width())?;
        check_len(
            "alloc_net output",
            (n + 1) * self.n_units,
            self.alloc_net.output_width(),
        )?;
        check_len("pay_net input", n, self.pay_net.input_width())?;
        check_len("pay_net output", n, self.pay_net.output_width())?;
        if self.pay_net.output_activation() != Self::pay_activation(self.payment_mode)
            || self.alloc_net.output_activation() != Activation::Linear
        {
            return Err(Error::Config(
                "network output activations do not match the payment mode".into(),
            ));
        }
        Ok(())
    }

    fn check_bids(&self, bids: &[f64]) -> Result<()> {
        check_len("bid vector", self.n_bidders, bids.len())?;
        if bids.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain(format!("non-finite bids {bids:?}")));
        }
        Ok(())
    }

    pub fn allocation_probs(&self, bids: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_bids(bids)?;
        let logits = self.alloc_net.forward_unchecked(bids);
        Ok(self.alloc_from_softmax(&self.unit_softmax(&logits)))
    }

    pub fn payments(&self, bids: &[f64], alloc: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_bids(bids)?;
        check_len("allocation rows", self.n_bidders, alloc.len())?;
        let out = self.pay_net.forward_unchecked(bids);
        Ok(self.payments_from(bids, alloc, &out))
    }

    pub fn outcome(&self, bids: &[f64]) -> Result<Outcome> {
        self.check_bids(bids)?;
        let logits = self.alloc_net.forward_unchecked(bids);
        let alloc = self.alloc_from_softmax(&self.unit_softmax(&logits));
        let out = self.pay_net.forward_unchecked(bids);
        let payments = self.payments_from(bids, &alloc, &out);
        Ok(Outcome { alloc, payments })
    }

    fn unit_softmax(&self, logits: &[f64]) -> Vec<Vec<f64>> {
        logits
            .chunks(self.n_bidders + 1)
            .map(|slot| {
                let max = slot.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exp: Vec<f64> = slot.iter().map(|&l| (l - max).exp()).collect();
                let total: f64 = exp.iter().sum();
                exp.into_iter().map(|e| e / total).collect()
            })
            .collect()
    }

    fn alloc_from_softmax(&self, softmax: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.n_bidders)
            .map(|n| softmax.iter().map(|unit| unit[n]).collect())
            .collect()
    }

    fn payments_from(&self, bids: &[f64], alloc: &[Vec<f64>], out: &[f64]) -> Vec<f64> {
        match self.payment_mode {
            PaymentMode::Penalty => out.to_vec(),
            PaymentMode::Structural => (0..self.n_bidders)
                .map(|n| out[n] * bids[n] * alloc[n].iter().sum::<f64>())
                .collect(),
        }
    }

    /// Forward pass retaining what [`AuctionModel::backward`] needs.
    pub fn pass(&self, bids: &[f64]) -> Result<ModelPass> {
        self.check_bids(bids)?;
        Ok(self.pass_unchecked(bids))
    }

    pub(crate) fn pass_unchecked(&self, bids: &[f64]) -> ModelPass {
        let alloc_trace = self.alloc_net.trace_unchecked(bids);
        let pay_trace = self.pay_net.trace_unchecked(bids);
        let softmax = self.unit_softmax(alloc_trace.output());
        let alloc = self.alloc_from_softmax(&softmax);
        let payments = self.payments_from(bids, &alloc, pay_trace.output());
        ModelPass {
            bids: bids.to_vec(),
            alloc_trace,
            pay_trace,
            softmax,
            outcome: Outcome { alloc, payments },
        }
    }

    /// Reverse pass for upstream gradients on the allocation matrix and the
    /// payments. Parameter gradients are accumulated into `acc`
    /// (allocation net, payment net) when given. Returns the gradient with
    /// respect to the bids when `want_input` is set.
    pub(crate) fn backward(
        &self,
        pass: &ModelPass,
        d_alloc: &[Vec<f64>],
        d_pay: &[f64],
        acc: Option<(&mut Gradients, &mut Gradients)>,
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let n_bidders = self.n_bidders;
        let mut d_alloc_total: Vec<Vec<f64>> = d_alloc.to_vec();
        let mut d_pay_out = vec![0.0; n_bidders];
        let mut d_bids_direct = vec![0.0; n_bidders];
        match self.payment_mode {
            PaymentMode::Penalty => d_pay_out.copy_from_slice(d_pay),
            PaymentMode::Structural => {
                let out = pass.pay_out();
                for n in 0..n_bidders {
                    let won = pass.outcome.units_won(n);
                    let b = pass.bids[n];
                    d_pay_out[n] = d_pay[n] * b * won;
                    d_bids_direct[n] = d_pay[n] * out[n] * won;
                    for g in &mut d_alloc_total[n] {
                        *g += d_pay[n] * out[n] * b;
                    }
                }
            }
        }

        let mut d_logits = Vec::with_capacity((n_bidders + 1) * self.n_units);
        for (m, probs) in pass.softmax.iter().enumerate() {
            // the unallocated slot carries no upstream gradient
            let g = |k: usize| {
                if k < n_bidders {
                    d_alloc_total[k][m]
                } else {
                    0.0
                }
            };
            let mean: f64 = probs.iter().enumerate().map(|(k, &z)| z * g(k)).sum();
            d_logits.extend(probs.iter().enumerate().map(|(k, &z)| z * (g(k) - mean)));
        }

        let (acc_alloc, acc_pay) = match acc {
            Some((a, p)) => (Some(a), Some(p)),
            None => (None, None),
        };
        let dx_alloc =
            self.alloc_net
                .backprop_trace(&pass.alloc_trace, &d_logits, acc_alloc, want_input);
        let dx_pay = self
            .pay_net
            .backprop_trace(&pass.pay_trace, &d_pay_out, acc_pay, want_input);
        if !want_input {
            return None;
        }
        let mut dx = d_bids_direct;
        for (d, (a, p)) in dx
            .iter_mut()
            .zip(dx_alloc.unwrap().iter().zip(&dx_pay.unwrap()))
        {
            *d += a + p;
        }
        Some(dx)
    }

    /// Utility of bidder `n` and its gradient with respect to every bid.
    pub(crate) fn utility_and_bid_grad(
        &self,
        value: f64,
        bids: &[f64],
        n: usize,
    ) -> (f64, Vec<f64>) {
        let pass = self.pass_unchecked(bids);
        let u = pass.outcome.utility_of(n, value);
        let mut d_alloc = vec![vec![0.0; self.n_units]; self.n_bidders];
        d_alloc[n].iter_mut().for_each(|g| *g = value);
        let mut d_pay = vec![0.0; self.n_bidders];
        d_pay[n] = -1.0;
        let dx = self.backward(&pass, &d_alloc, &d_pay, None, true).unwrap();
        (u, dx)
    }

    pub fn is_finite(&self) -> bool {
        self.alloc_net.is_finite() && self.pay_net.is_finite()
    }

    pub fn max_abs_param(&self) -> f64 {
        [&self.alloc_net, &self.pay_net]
            .iter()
            .flat_map(|net| net.params_flat())
            .fold(0.0, |acc, p| acc.max(p.abs()))
    }
}

impl Mechanism for AuctionModel {
    fn n_bidders(&self) -> usize {
        self.n_bidders
    }

    fn n_units(&self) -> usize {
        self.n_units
    }

    fn run(&self, bids: &[f64]) -> Result<Outcome> {
        self.outcome(bids)
    }
}

impl DifferentiableMechanism for AuctionModel {
    fn utility_and_grad(&self, value: f64, bids: &[f64], n: usize) -> Result<(f64, f64)> {
        self.check_bids(bids)?;
        if n >= self.n_bidders {
            return Err(Error::Dimension {
                what: "bidder index",
                expected: self.n_bidders,
                actual: n,
            });
        }
        let (u, dx) = self.utility_and_bid_grad(value, bids, n);
        Ok((u, dx[n]))
    }
}
