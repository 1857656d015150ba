//! Precoder optimization by barrier-augmented subgradient ascent on the GMI
//! approximation: sum rate, and max-min fairness with the common-stream
//! allocation solved in closed form at every step.

mod alloc;
mod ascent;
mod objective;

pub use alloc::allocate_common_mmf;
pub use ascent::{maximize_mmf, maximize_sum_rate};
pub use objective::{mmf_subgradient, softmin_weights, sr_subgradient};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::alphabet::{modes_for_complexity, TransmissionMode};
use crate::channel::ChannelRealization;
use crate::rates::{CommonAllocation, SchemeKind};
use crate::{seed, Error, Result, C64};

/// Receiver noise variance; transmit power is expressed relative to it.
pub const NOISE_VARIANCE: f64 = 1.0;

/// Fraction of the budget used by initial precoders.
pub const INIT_POWER_FRACTION: f64 = 0.95;

/// Power budget for an SNR in dB at unit noise variance.
pub fn power_budget(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Precoding matrix with its power budget. Column 0 is the common precoder,
/// column `k + 1` the private precoder of user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    p: DMatrix<C64>,
    budget: f64,
}

impl Precoder {
    /// Accepts any matrix within the budget (up to 1e-9).
    pub fn new(p: DMatrix<C64>, budget: f64) -> Result<Self> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::InvalidParameter {
                name: "power_budget",
                reason: format!("must be positive, got {budget}"),
            });
        }
        let power = p.norm_squared();
        if power > budget + 1e-9 {
            return Err(Error::PowerBudget { power, budget });
        }
        Ok(Precoder { p, budget })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.p
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.p
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// `‖P‖_F²`.
    pub fn power(&self) -> f64 {
        self.p.norm_squared()
    }

    pub fn users(&self) -> usize {
        self.p.ncols() - 1
    }

    pub fn n_t(&self) -> usize {
        self.p.nrows()
    }

    /// Strictly inside the power budget.
    pub fn is_interior(&self) -> bool {
        self.power() < self.budget
    }

    /// Zeroes the columns of streams the mode leaves empty and rescales the
    /// rest back to the original power.
    pub fn for_mode(&self, mode: &TransmissionMode) -> Precoder {
        let power = self.power();
        let mut p = self.p.clone();
        if mode.common_alphabet().is_null() {
            p.column_mut(0).fill(C64::new(0.0, 0.0));
        }
        if mode.private_alphabet().is_null() {
            for k in 1..p.ncols() {
                p.column_mut(k).fill(C64::new(0.0, 0.0));
            }
        }
        let left = p.norm_squared();
        if left > 0.0 {
            p *= C64::new((power / left).sqrt(), 0.0);
        }
        Precoder { p, budget: self.budget }
    }
}

/// Hyperparameters of the barrier schedule and line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierConfig {
    pub tau0: f64,
    pub beta: f64,
    pub tau_max: f64,
    pub eps: f64,
    pub v_max: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// Log-sum-exp smoothing of the minimum (max-min fairness only).
    pub gamma: f64,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        BarrierConfig {
            tau0: 1.0,
            beta: 10.0,
            tau_max: 1e4,
            eps: 1e-5,
            v_max: 300,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            gamma: -30.0,
        }
    }
}

impl BarrierConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.tau0 > 0.0) {
            return bad("tau0", "must be positive");
        }
        if !(self.beta > 1.0) {
            return bad("beta", "must exceed 1");
        }
        if !(self.tau_max >= self.tau0) || !self.tau_max.is_finite() {
            return bad("tau_max", "must be finite and at least tau0");
        }
        if !(self.eps > 0.0) {
            return bad("eps", "must be positive");
        }
        if self.v_max == 0 {
            return bad("v_max", "must be at least 1");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c", "must lie in (0, 1)");
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return bad("armijo_shrink", "must lie in (0, 1)");
        }
        if !(self.gamma < 0.0) || !self.gamma.is_finite() {
            return bad("gamma", "must be negative and finite");
        }
        Ok(())
    }
}

/// One accepted ascent step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub outer: usize,
    pub inner: usize,
    /// Barrier objective before and after the step, with the same allocation.
    pub barrier_before: f64,
    pub barrier_after: f64,
    /// Surrogate objective (sum rate, or smoothed minimum rate) after the step.
    pub objective_bits: f64,
    /// `‖P‖_F²` after the step.
    pub power: f64,
}

/// Outcome of one optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub precoder: Precoder,
    pub allocation: CommonAllocation,
    /// Sum rate or minimum user rate (bits) under the approximation.
    pub objective_bits: f64,
    pub trace: Vec<TraceEntry>,
    /// False when some inner loop stopped at `v_max`.
    pub converged: bool,
}

/// Optimization target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    SumRate,
    MaxMin,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::SumRate => "sr",
            Objective::MaxMin => "mmf",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sr" | "sum_rate" => Ok(Objective::SumRate),
            "mmf" | "max_min" => Ok(Objective::MaxMin),
            other => Err(Error::InvalidParameter {
                name: "objective",
                reason: format!("unknown objective `{other}`"),
            }),
        }
    }
}

/// First initial precoder of a restart set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Matched-filter private columns and a dominant-eigenmode common column,
    /// followed by random restarts.
    MrtPlusCommon,
    Random,
}

/// Initial precoders at `0.95·P_T`. With `MrtPlusCommon` the first is
/// structured and the remaining `restarts - 1` are random.
pub fn init_precoders(
    h: &ChannelRealization,
    p_t: f64,
    strategy: InitStrategy,
    restarts: usize,
    rng_seed: u64,
) -> Result<Vec<Precoder>> {
    if restarts == 0 {
        return Err(Error::InvalidParameter {
            name: "restarts",
            reason: "must be at least 1".into(),
        });
    }
    let target = INIT_POWER_FRACTION * p_t;
    let (n_t, k) = (h.n_t(), h.users());
    let mut out = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let mut p = if r == 0 && strategy == InitStrategy::MrtPlusCommon {
            mrt_plus_common(h, target)
        } else {
            let mut rng = seed::rng(seed::mix(rng_seed, r as u64));
            DMatrix::from_fn(n_t, k + 1, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
        };
        p *= C64::new((target / p.norm_squared()).sqrt(), 0.0);
        out.push(Precoder::new(p, p_t)?);
    }
    Ok(out)
}

fn unit_or_first(v: nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    let n = v.norm();
    if n > 0.0 {
        v / C64::new(n, 0.0)
    } else {
        let mut e = nalgebra::DVector::zeros(v.len());
        e[0] = C64::new(1.0, 0.0);
        e
    }
}

fn mrt_plus_common(h: &ChannelRealization, target: f64) -> DMatrix<C64> {
    let (n_t, k) = (h.n_t(), h.users());
    let svd = h.matrix().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = crate::rates::argmax(svd.singular_values.as_slice());
    let common = unit_or_first(u.column(top).into_owned());
    let mut p = DMatrix::zeros(n_t, k + 1);
    p.set_column(0, &(common * C64::new((0.5 * target).sqrt(), 0.0)));
    let each = C64::new((0.5 * target / k as f64).sqrt(), 0.0);
    for (user, hk) in h.h.iter().enumerate() {
        p.set_column(user + 1, &(unit_or_first(hk.clone()) * each));
    }
    p
}

/// Result of optimizing every mode admissible under a complexity budget.
#[derive(Debug, Clone)]
pub struct ModeSearch {
    /// One entry per mode, in table order.
    pub runs: Vec<(TransmissionMode, Result<OptResult>)>,
    /// Index into `runs` of the best successful run.
    pub best: Option<usize>,
}

impl ModeSearch {
    pub fn best(&self) -> Option<(TransmissionMode, &OptResult)> {
        let (mode, res) = &self.runs[self.best?];
        res.as_ref().ok().map(|r| (*mode, r))
    }
}

/// Index of the largest score; ties go to the earliest entry, which in table
/// order is the larger private alphabet.
pub fn select_best(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, s) in scores.iter().enumerate() {
        if let Some(v) = *s {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((idx, v));
            }
        }
    }
    best.map(|(idx, _)| idx)
}

/// Runs one optimizer per mode from mode-adapted copies of `inits`.
pub fn optimize_modes(
    h: &ChannelRealization,
    modes: &[TransmissionMode],
    scheme: SchemeKind,
    objective: Objective,
    cfg: &BarrierConfig,
    inits: &[Precoder],
) -> ModeSearch {
    let runs: Vec<_> = modes
        .iter()
        .map(|mode| {
            let adapted: Vec<Precoder> = inits.iter().map(|p| p.for_mode(mode)).collect();
            let res = match objective {
                Objective::SumRate => maximize_sum_rate(h, *mode, scheme, cfg, &adapted),
                Objective::MaxMin => maximize_mmf(h, *mode, scheme, cfg, &adapted),
            };
            (*mode, res)
        })
        .collect();
    let scores: Vec<Option<f64>> = runs
        .iter()
        .map(|(_, r)| r.as_ref().ok().map(|r| r.objective_bits))
        .collect();
    let best = select_best(&scores);
    ModeSearch { runs, best }
}

/// Best mode under complexity `delta` by final (approximate) objective.
pub fn adaptive_mode_search(
    h: &ChannelRealization,
    delta: usize,
    scheme: SchemeKind,
    objective: Objective,
    cfg: &BarrierConfig,
    inits: &[Precoder],
) -> Result<(TransmissionMode, OptResult)> {
    let modes = modes_for_complexity(delta)?;
    let search = optimize_modes(h, &modes, scheme, objective, cfg, inits);
    if let Some((mode, res)) = search.best() {
        return Ok((mode, res.clone()));
    }
    let err = search
        .runs
        .into_iter()
        .find_map(|(_, r)| r.err())
        .unwrap_or_else(|| Error::Dimension("no admissible mode".into()));
    Err(err)
}
