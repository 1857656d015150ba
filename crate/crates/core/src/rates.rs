//! Per-stream GMI values and the per-user rates they yield under each RSMA
//! scheme.
//!
//! Precoder column 0 carries the common stream and column `k + 1` the private
//! stream of user `k`. A stream whose alphabet is `{0}` carries no signal, so
//! its column is treated as zero wherever it appears.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::alphabet::{product_alphabet, Alphabet, TransmissionMode, VectorAlphabet};
use crate::channel::ChannelRealization;
use crate::gmi::{gmi_approx, gmi_exact, EffectiveChannel, ExactSettings};
use crate::optimize::Precoder;
use crate::{seed, Error, Result, C64};

/// RSMA variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Conventional RSMA, receivers cancel the common stream.
    ConvSic,
    /// Conventional RSMA, SIC-free receivers.
    ConvNonSic,
    /// Codeword-segmentation RSMA (always SIC-free).
    Cs,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::ConvSic, SchemeKind::ConvNonSic, SchemeKind::Cs];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::ConvSic => "conv_sic",
            SchemeKind::ConvNonSic => "conv_nonsic",
            SchemeKind::Cs => "cs",
        }
    }

    /// Whether receivers cancel the common stream before private decoding.
    pub fn uses_sic(self) -> bool {
        self == SchemeKind::ConvSic
    }

    /// Whether every user must decode the whole common stream.
    pub fn is_conventional(self) -> bool {
        self != SchemeKind::Cs
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter {
                name: "scheme",
                reason: format!("unknown scheme `{s}`"),
            })
    }
}

/// How stream GMIs are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMethod {
    /// Closed-form approximation.
    Approx,
    /// Monte-Carlo exact GMI; role seeds are derived from `seed`.
    Exact { settings: ExactSettings, seed: u64 },
}

/// Stream GMIs of every user, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRates {
    pub common: Vec<f64>,
    pub private_sic: Vec<f64>,
    pub private_nonsic: Vec<f64>,
    /// Monte-Carlo standard errors (all zero for the approximation).
    pub common_se: Vec<f64>,
    pub private_sic_se: Vec<f64>,
    pub private_nonsic_se: Vec<f64>,
}

impl StreamRates {
    /// Stream rates without standard errors.
    pub fn from_values(common: Vec<f64>, private_sic: Vec<f64>, private_nonsic: Vec<f64>) -> Self {
        let k = common.len();
        StreamRates {
            common,
            private_sic,
            private_nonsic,
            common_se: vec![0.0; k],
            private_sic_se: vec![0.0; k],
            private_nonsic_se: vec![0.0; k],
        }
    }

    pub fn users(&self) -> usize {
        self.common.len()
    }

    /// Private rates relevant to the scheme.
    pub fn private_for(&self, scheme: SchemeKind) -> &[f64] {
        if scheme.uses_sic() {
            &self.private_sic
        } else {
            &self.private_nonsic
        }
    }
}

/// Share of the common stream assigned to each user.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonAllocation(Vec<f64>);

impl CommonAllocation {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        let sum: f64 = c.iter().sum();
        if c.is_empty() || c.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: format!("allocation must be non-negative and sum to 1, got {c:?}"),
            });
        }
        Ok(CommonAllocation(c))
    }

    pub fn uniform(k: usize) -> Self {
        CommonAllocation(vec![1.0 / k as f64; k])
    }

    pub fn one_hot(k: usize, user: usize) -> Self {
        let mut c = vec![0.0; k];
        c[user] = 1.0;
        CommonAllocation(c)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn from_raw(c: Vec<f64>) -> Self {
        CommonAllocation(c)
    }
}

/// Decoding role of one GMI evaluation at one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Common,
    PrivateSic,
    PrivateNonSic,
}

impl StreamRole {
    fn index(self) -> u64 {
        match self {
            StreamRole::Common => 0,
            StreamRole::PrivateSic => 1,
            StreamRole::PrivateNonSic => 2,
        }
    }
}

/// Column indices of one role: desired column, optimally treated columns and
/// Gaussian-treated columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleColumns {
    pub x: usize,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl RoleColumns {
    pub fn for_user(users: usize, user: usize, role: StreamRole) -> RoleColumns {
        let others: Vec<usize> = (0..users).filter(|&o| o != user).map(|o| o + 1).collect();
        match role {
            StreamRole::Common => RoleColumns {
                x: 0,
                i: vec![user + 1],
                j: others,
            },
            StreamRole::PrivateSic => RoleColumns {
                x: user + 1,
                i: vec![],
                j: others,
            },
            StreamRole::PrivateNonSic => RoleColumns {
                x: user + 1,
                i: vec![0],
                j: others,
            },
        }
    }

    /// Stacked order `[x | i | j]`.
    pub fn stacked(&self) -> Vec<usize> {
        std::iter::once(self.x)
            .chain(self.i.iter().copied())
            .chain(self.j.iter().copied())
            .collect()
    }
}

/// Alphabets of every decoding role for one mode and user count.
#[derive(Debug, Clone)]
pub struct ModeAlphabets {
    pub mode: TransmissionMode,
    pub users: usize,
    pub common: Alphabet,
    pub private: Alphabet,
    /// `{X_p}` as a one-dimensional vector alphabet.
    pub private_vec: VectorAlphabet,
    /// `{X_c}` as a one-dimensional vector alphabet.
    pub common_vec: VectorAlphabet,
    /// Zero-dimensional alphabet (no optimally treated interference).
    pub empty: VectorAlphabet,
    /// `X_p^{K-1}`, the Gaussian-treated private interference.
    pub others: VectorAlphabet,
}

impl ModeAlphabets {
    pub fn new(mode: TransmissionMode, users: usize) -> Self {
        let common = mode.common_alphabet();
        let private = mode.private_alphabet();
        ModeAlphabets {
            mode,
            users,
            private_vec: product_alphabet(std::slice::from_ref(&private)),
            common_vec: product_alphabet(std::slice::from_ref(&common)),
            empty: product_alphabet(&[]),
            others: product_alphabet(&vec![private.clone(); users.saturating_sub(1)]),
            common,
            private,
        }
    }

    /// `(X, I, J)` of a role.
    pub fn role(&self, role: StreamRole) -> (&Alphabet, &VectorAlphabet, &VectorAlphabet) {
        match role {
            StreamRole::Common => (&self.common, &self.private_vec, &self.others),
            StreamRole::PrivateSic => (&self.private, &self.empty, &self.others),
            StreamRole::PrivateNonSic => (&self.private, &self.common_vec, &self.others),
        }
    }

    /// 1 for columns whose stream carries signal, 0 for `{0}` streams.
    pub fn column_mask(&self) -> Vec<f64> {
        let p = if self.private.is_null() { 0.0 } else { 1.0 };
        let c = if self.common.is_null() { 0.0 } else { 1.0 };
        std::iter::once(c).chain(std::iter::repeat_n(p, self.users)).collect()
    }
}

/// `h^H P` with `{0}`-stream columns zeroed.
pub fn masked_row(h: &DVector<C64>, p: &DMatrix<C64>, mask: &[f64]) -> Vec<C64> {
    let row = h.adjoint() * p;
    row.iter().zip(mask).map(|(z, m)| z * *m).collect()
}

/// Effective channel of a role from a masked `h^H P` row.
pub fn role_channel(row: &[C64], cols: &RoleColumns, sigma2: f64) -> EffectiveChannel {
    EffectiveChannel::new(
        row[cols.x],
        cols.i.iter().map(|&c| row[c]).collect(),
        cols.j.iter().map(|&c| row[c]).collect(),
        sigma2,
    )
}

fn check_shapes(p: &DMatrix<C64>, h: &ChannelRealization) -> Result<()> {
    if p.ncols() != h.users() + 1 || p.nrows() != h.n_t() {
        return Err(Error::Dimension(format!(
            "precoder is {}x{}, expected {}x{}",
            p.nrows(),
            p.ncols(),
            h.n_t(),
            h.users() + 1
        )));
    }
    Ok(())
}

/// Common, SIC-private and SIC-free-private GMIs of every user.
pub fn stream_rates(
    p: &Precoder,
    h: &ChannelRealization,
    mode: TransmissionMode,
    method: &RateMethod,
    sigma2: f64,
) -> Result<StreamRates> {
    if p.power() > p.budget() + 1e-9 {
        return Err(Error::PowerBudget {
            power: p.power(),
            budget: p.budget(),
        });
    }
    stream_rates_unchecked(p.matrix(), h, mode, method, sigma2)
}

/// As [`stream_rates`] but for a bare matrix without a power check.
pub fn stream_rates_unchecked(
    p: &DMatrix<C64>,
    h: &ChannelRealization,
    mode: TransmissionMode,
    method: &RateMethod,
    sigma2: f64,
) -> Result<StreamRates> {
    let roles = [StreamRole::Common, StreamRole::PrivateSic, StreamRole::PrivateNonSic];
    let [common, sic, nonsic] = role_rates(p, h, mode, method, sigma2, roles)?;
    Ok(StreamRates {
        common: common.0,
        private_sic: sic.0,
        private_nonsic: nonsic.0,
        common_se: common.1,
        private_sic_se: sic.1,
        private_nonsic_se: nonsic.1,
    })
}

/// Common rates and the private rates of the scheme's receiver type only;
/// the other private lists are left empty.
pub fn scheme_stream_rates(
    p: &DMatrix<C64>,
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    method: &RateMethod,
    sigma2: f64,
) -> Result<StreamRates> {
    let private = if scheme.uses_sic() {
        StreamRole::PrivateSic
    } else {
        StreamRole::PrivateNonSic
    };
    let [common, own] = role_rates(p, h, mode, method, sigma2, [StreamRole::Common, private])?;
    let mut sr = StreamRates::from_values(common.0, vec![], vec![]);
    sr.common_se = common.1;
    sr.private_sic_se.clear();
    sr.private_nonsic_se.clear();
    if scheme.uses_sic() {
        sr.private_sic = own.0;
        sr.private_sic_se = own.1;
    } else {
        sr.private_nonsic = own.0;
        sr.private_nonsic_se = own.1;
    }
    Ok(sr)
}

/// `(values, standard errors)` per requested role.
fn role_rates<const N: usize>(
    p: &DMatrix<C64>,
    h: &ChannelRealization,
    mode: TransmissionMode,
    method: &RateMethod,
    sigma2: f64,
    roles: [StreamRole; N],
) -> Result<[(Vec<f64>, Vec<f64>); N]> {
    check_shapes(p, h)?;
    let users = h.users();
    let alph = ModeAlphabets::new(mode, users);
    let mask = alph.column_mask();
    let mut out: [(Vec<f64>, Vec<f64>); N] =
        std::array::from_fn(|_| (vec![0.0; users], vec![0.0; users]));
    for (k, hk) in h.h.iter().enumerate() {
        let row = masked_row(hk, p, &mask);
        for (r, &role) in roles.iter().enumerate() {
            let eff = role_channel(&row, &RoleColumns::for_user(users, k, role), sigma2);
            let (x, i, j) = alph.role(role);
            let (v, se) = match method {
                RateMethod::Approx => (gmi_approx(&eff, x, i, j)?, 0.0),
                RateMethod::Exact { settings, seed } => {
                    let s = seed::mix_all(*seed, &[k as u64, role.index()]);
                    let est = gmi_exact(&eff, x, i, j, settings, s)?;
                    (est.value_bits, est.mc_std_error_bits)
                }
            };
            out[r].0[k] = v;
            out[r].1[k] = se;
        }
    }
    Ok(out)
}

/// Index of the smallest entry, ties to the lowest index.
pub fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = k;
        }
    }
    best
}

/// Index of the largest entry, ties to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// Common-stream rate each user sees for its share: the worst user's common
/// rate for conventional schemes, the user's own for CS.
pub fn effective_common(scheme: SchemeKind, sr: &StreamRates) -> Vec<f64> {
    if scheme.is_conventional() {
        let min = sr.common[argmin(&sr.common)];
        vec![min; sr.users()]
    } else {
        sr.common.clone()
    }
}

/// Achievable rate of each user.
pub fn user_rates(scheme: SchemeKind, sr: &StreamRates, c: &CommonAllocation) -> Vec<f64> {
    let common = effective_common(scheme, sr);
    let private = sr.private_for(scheme);
    c.as_slice()
        .iter()
        .zip(&common)
        .zip(private)
        .map(|((ck, ic), ip)| ck * ic + ip)
        .collect()
}

/// Sum rate at the optimal allocation: `min` over common rates for
/// conventional schemes, `max` for CS.
pub fn sum_rate(scheme: SchemeKind, sr: &StreamRates) -> f64 {
    let common = if scheme.is_conventional() {
        sr.common[argmin(&sr.common)]
    } else {
        sr.common[argmax(&sr.common)]
    };
    common + sr.private_for(scheme).iter().sum::<f64>()
}

/// Metric evaluations per received symbol, `|X_c|·|X_p|`.
pub fn decoding_complexity(mode: &TransmissionMode) -> usize {
    mode.complexity()
}

/// Whether a complexity-`delta` receiver can decode the mode.
pub fn feasible(mode: &TransmissionMode, delta: usize) -> bool {
    decoding_complexity(mode) <= delta
}
