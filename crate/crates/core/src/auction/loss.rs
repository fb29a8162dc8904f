use crate::auction::{AuctionModel, BatchMetrics, LagrangeState};
use crate::error::{check_len, Error, Result};
use crate::market::ValuationProfile;
use crate::nn::Gradients;

/// Augmented-Lagrangian loss of one batch and its parameter gradients.
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    /// Batch mean revenue.
    pub revenue: f64,
    /// Batch mean of the summed IR shortfall.
    pub ir_penalty: f64,
    /// Mean regret over profiles and bidders.
    pub ic_penalty: f64,
    pub alloc_grads: Gradients,
    pub pay_grads: Gradients,
}

impl LossOutput {
    pub fn metrics(&self, iter: usize) -> BatchMetrics {
        BatchMetrics {
            iter,
            revenue: self.revenue,
            ir_penalty: self.ir_penalty,
            ic_penalty: self.ic_penalty,
            loss: self.loss,
        }
    }
}

/// `-R + lambda_ir P_ir + lambda_ic P_ic + rho/2 (P_ir^2 + P_ic^2)`.
///
/// `misreports[i][n]` is the frozen misreport of bidder `n` in profile `i`;
/// it is treated as a constant, while gradients flow through the networks
/// at both the truthful and the misreported inputs.
pub fn loss(
    model: &AuctionModel,
    batch: &[ValuationProfile],
    misreports: &[Vec<f64>],
    lagrange: &LagrangeState,
) -> Result<LossOutput> {
    if batch.is_empty() {
        return Err(Error::Config("loss needs a nonempty batch".into()));
    }
    check_len("misreport rows", batch.len(), misreports.len())?;
    let n_bidders = model.n_bidders;
    let b = batch.len() as f64;
    let bn = b * n_bidders as f64;

    struct ProfileState {
        truthful: crate::auction::model::ModelPass,
        misreported: Vec<crate::auction::model::ModelPass>,
        violates_ir: Vec<bool>,
        has_regret: Vec<bool>,
    }

    let mut states = Vec::with_capacity(batch.len());
    let (mut revenue, mut ir, mut ic) = (0.0, 0.0, 0.0);
    for (profile, reports) in batch.iter().zip(misreports) {
        let values = &profile.values;
        check_len("profile", n_bidders, values.len())?;
        check_len("misreports", n_bidders, reports.len())?;
        let truthful = model.pass(values)?;
        let mut misreported = Vec::with_capacity(n_bidders);
        let mut violates_ir = Vec::with_capacity(n_bidders);
        let mut has_regret = Vec::with_capacity(n_bidders);
        revenue += truthful.outcome.revenue();
        let mut bids = values.clone();
        for n in 0..n_bidders {
            let u = truthful.outcome.utility_of(n, values[n]);
            violates_ir.push(u < 0.0);
            ir += (-u).max(0.0);
            bids[n] = reports[n];
            let pass = model.pass(&bids)?;
            bids[n] = values[n];
            let gain = pass.outcome.utility_of(n, values[n]) - u;
            has_regret.push(gain > 0.0);
            ic += gain.max(0.0);
            misreported.push(pass);
        }
        states.push(ProfileState {
            truthful,
            misreported,
            violates_ir,
            has_regret,
        });
    }
    let revenue = revenue / b;
    let ir_penalty = ir / b;
    let ic_penalty = ic / bn;
    let loss = -revenue
        + lagrange.lambda_ir * ir_penalty
        + lagrange.lambda_ic * ic_penalty
        + 0.5 * lagrange.rho * (ir_penalty * ir_penalty + ic_penalty * ic_penalty);

    // d loss / d (per-profile IR sum) and d loss / d (per-bidder regret)
    let c_ir = (lagrange.lambda_ir + lagrange.rho * ir_penalty) / b;
    let c_ic = (lagrange.lambda_ic + lagrange.rho * ic_penalty) / bn;

    let mut alloc_grads = Gradients::zeros_like(&model.alloc_net);
    let mut pay_grads = Gradients::zeros_like(&model.pay_net);
    let n_units = model.n_units;
    let mut d_alloc = vec![vec![0.0; n_units]; n_bidders];
    let mut d_pay = vec![0.0; n_bidders];
    for (profile, state) in batch.iter().zip(&states) {
        let values = &profile.values;
        for n in 0..n_bidders {
            // weight on -u_n from the IR and regret terms
            let w = if state.violates_ir[n] { c_ir } else { 0.0 }
                + if state.has_regret[n] { c_ic } else { 0.0 };
            d_pay[n] = -1.0 / b + w;
            d_alloc[n].iter_mut().for_each(|g| *g = -w * values[n]);
        }
        model.backward(
            &state.truthful,
            &d_alloc,
            &d_pay,
            Some((&mut alloc_grads, &mut pay_grads)),
            false,
        );
        for n in 0..n_bidders {
            if !state.has_regret[n] {
                continue;
            }
            d_alloc.iter_mut().flatten().for_each(|g| *g = 0.0);
            d_pay.iter_mut().for_each(|g| *g = 0.0);
            d_alloc[n].iter_mut().for_each(|g| *g = c_ic * values[n]);
            d_pay[n] = -c_ic;
            model.backward(
                &state.misreported[n],
                &d_alloc,
                &d_pay,
                Some((&mut alloc_grads, &mut pay_grads)),
                false,
            );
        }
    }

    Ok(LossOutput {
        loss,
        revenue,
        ir_penalty,
        ic_penalty,
        alloc_grads,
        pay_grads,
    })
}
