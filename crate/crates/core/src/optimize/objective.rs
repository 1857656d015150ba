//! Surrogate objectives (approximate GMI, nats) and their gradients in the
//! global precoder layout.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;

use crate::alphabet::TransmissionMode;
use crate::channel::ChannelRealization;
use crate::gmi::approx_value_and_row;
use crate::rates::{
    argmax, argmin, masked_row, role_channel, CommonAllocation, ModeAlphabets, RoleColumns,
    SchemeKind, StreamRole,
};
use crate::{Error, Result, C64};

use super::{Precoder, NOISE_VARIANCE};

/// Common and scheme-relevant private GMIs (nats) of every user, with their
/// gradient rows in global column order when requested.
pub(crate) struct RoleValues {
    pub common: Vec<f64>,
    pub private: Vec<f64>,
    pub common_rows: Vec<Vec<C64>>,
    pub private_rows: Vec<Vec<C64>>,
}

pub(crate) struct Problem<'a> {
    h: &'a ChannelRealization,
    alph: ModeAlphabets,
    mask: Vec<f64>,
    pub scheme: SchemeKind,
    private_role: StreamRole,
}

impl<'a> Problem<'a> {
    pub fn new(h: &'a ChannelRealization, mode: TransmissionMode, scheme: SchemeKind) -> Self {
        let alph = ModeAlphabets::new(mode, h.users());
        let mask = alph.column_mask();
        let private_role = if scheme.uses_sic() {
            StreamRole::PrivateSic
        } else {
            StreamRole::PrivateNonSic
        };
        Problem {
            h,
            alph,
            mask,
            scheme,
            private_role,
        }
    }

    pub fn users(&self) -> usize {
        self.h.users()
    }

    pub fn check(&self, p: &DMatrix<C64>) -> Result<()> {
        if p.nrows() != self.h.n_t() || p.ncols() != self.users() + 1 {
            return Err(Error::Dimension(format!(
                "precoder is {}x{}, expected {}x{}",
                p.nrows(),
                p.ncols(),
                self.h.n_t(),
                self.users() + 1
            )));
        }
        Ok(())
    }

    fn role(&self, row: &[C64], user: usize, role: StreamRole, grad: bool) -> Result<(f64, Vec<C64>)> {
        let cols = RoleColumns::for_user(self.users(), user, role);
        let eff = role_channel(row, &cols, NOISE_VARIANCE);
        let (x, i, j) = self.alph.role(role);
        let (value, stacked) = approx_value_and_row(&eff, x, i, j, grad)?;
        let mut global = Vec::new();
        if let Some(stacked) = stacked {
            global = vec![C64::new(0.0, 0.0); self.users() + 1];
            for (t, col) in cols.stacked().into_iter().enumerate() {
                global[col] += stacked[t] * self.mask[col];
            }
        }
        Ok((value, global))
    }

    pub fn evaluate(&self, p: &DMatrix<C64>, grad: bool) -> Result<RoleValues> {
        let k = self.users();
        let mut out = RoleValues {
            common: vec![0.0; k],
            private: vec![0.0; k],
            common_rows: Vec::with_capacity(if grad { k } else { 0 }),
            private_rows: Vec::with_capacity(if grad { k } else { 0 }),
        };
        for (user, hk) in self.h.h.iter().enumerate() {
            let row = masked_row(hk, p, &self.mask);
            let (vc, rc) = self.role(&row, user, StreamRole::Common, grad)?;
            let (vp, rp) = self.role(&row, user, self.private_role, grad)?;
            out.common[user] = vc;
            out.private[user] = vp;
            if grad {
                out.common_rows.push(rc);
                out.private_rows.push(rp);
            }
        }
        Ok(out)
    }

    /// `Σ_k h_k (wc_k ρc_k + wp_k ρp_k)^T`.
    pub fn assemble(&self, rv: &RoleValues, wc: &[f64], wp: &[f64]) -> DMatrix<C64> {
        let k = self.users();
        let mut g = DMatrix::zeros(self.h.n_t(), k + 1);
        for (user, hk) in self.h.h.iter().enumerate() {
            for col in 0..=k {
                let coef = rv.common_rows[user][col] * wc[user] + rv.private_rows[user][col] * wp[user];
                if coef != C64::new(0.0, 0.0) {
                    let mut dst = g.column_mut(col);
                    dst.axpy(coef, hk, C64::new(1.0, 0.0));
                }
            }
        }
        g
    }

    /// Index of the common rate entering the sum rate.
    pub fn sum_rate_common_user(&self, common: &[f64]) -> usize {
        if self.scheme.is_conventional() {
            argmin(common)
        } else {
            argmax(common)
        }
    }

    /// Sum rate (nats) and optionally its gradient.
    pub fn sum_rate(&self, p: &DMatrix<C64>, grad: bool) -> Result<(f64, Option<DMatrix<C64>>)> {
        let rv = self.evaluate(p, grad)?;
        let sel = self.sum_rate_common_user(&rv.common);
        let value = rv.common[sel] + rv.private.iter().sum::<f64>();
        let g = grad.then(|| {
            let mut wc = vec![0.0; self.users()];
            wc[sel] = 1.0;
            self.assemble(&rv, &wc, &vec![1.0; self.users()])
        });
        Ok((value, g))
    }

    /// Per-user rates (nats) at allocation `c` and the weights each common
    /// rate gradient receives per user.
    fn user_rate_parts(&self, rv: &RoleValues, c: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let k = self.users();
        if self.scheme.is_conventional() {
            let sel = argmin(&rv.common);
            let rates = (0..k).map(|u| c[u] * rv.common[sel] + rv.private[u]).collect();
            (rates, vec![sel; k])
        } else {
            let rates = (0..k).map(|u| c[u] * rv.common[u] + rv.private[u]).collect();
            (rates, (0..k).collect())
        }
    }

    /// Log-sum-exp smoothed minimum user rate (nats) at a fixed allocation,
    /// smoothed on the bit scale with `gamma`.
    pub fn smoothed_min(
        &self,
        p: &DMatrix<C64>,
        c: &[f64],
        gamma: f64,
        grad: bool,
    ) -> Result<(f64, Option<DMatrix<C64>>)> {
        let rv = self.evaluate(p, grad)?;
        let (rates, common_of) = self.user_rate_parts(&rv, c);
        let bits: Vec<f64> = rates.iter().map(|r| r / LN_2).collect();
        let (smooth_bits, w) = softmin(&bits, gamma);
        let g = grad.then(|| {
            let k = self.users();
            let mut wc = vec![0.0; k];
            for u in 0..k {
                wc[common_of[u]] += w[u] * c[u];
            }
            self.assemble(&rv, &wc, &w)
        });
        Ok((smooth_bits * LN_2, g))
    }
}

/// `(1/γ) log Σ exp(γ r_k)` and its weights `exp(γ r_k) / Σ exp(γ r_j)`.
fn softmin(rates: &[f64], gamma: f64) -> (f64, Vec<f64>) {
    let args: Vec<f64> = rates.iter().map(|r| gamma * r).collect();
    let lse = crate::gmi::log_sum_exp(&args);
    let w = args.iter().map(|a| (a - lse).exp()).collect();
    (lse / gamma, w)
}

/// Softmin weights of a rate vector.
pub fn softmin_weights(rates: &[f64], gamma: f64) -> Vec<f64> {
    softmin(rates, gamma).1
}

/// Gradient (nats, conjugate Wirtinger layout) of the sum rate: the selected
/// user's common-rate gradient plus every private-rate gradient. The common
/// rate is the minimum for conventional schemes and the maximum for CS.
pub fn sr_subgradient(
    p: &Precoder,
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
) -> Result<DMatrix<C64>> {
    let prob = Problem::new(h, mode, scheme);
    prob.check(p.matrix())?;
    Ok(prob.sum_rate(p.matrix(), true)?.1.expect("gradient requested"))
}

/// Gradient (nats) of the smoothed minimum user rate at allocation `c`.
pub fn mmf_subgradient(
    p: &Precoder,
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    c: &CommonAllocation,
    gamma: f64,
) -> Result<DMatrix<C64>> {
    if !(gamma < 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must be negative, got {gamma}"),
        });
    }
    let prob = Problem::new(h, mode, scheme);
    prob.check(p.matrix())?;
    if c.as_slice().len() != prob.users() {
        return Err(Error::Dimension("allocation length differs from user count".into()));
    }
    Ok(prob
        .smoothed_min(p.matrix(), c.as_slice(), gamma, true)?
        .1
        .expect("gradient requested"))
}
