//! Barrier-augmented ascent with Armijo backtracking.

use nalgebra::DMatrix;

use crate::alphabet::TransmissionMode;
use crate::channel::ChannelRealization;
use crate::rates::{
    argmax, effective_common, stream_rates_unchecked, sum_rate, user_rates, CommonAllocation,
    RateMethod, SchemeKind,
};
use crate::{Error, Result, C64};

use super::objective::Problem;
use super::{allocate_common_mmf, BarrierConfig, OptResult, Precoder, TraceEntry, NOISE_VARIANCE};

const MAX_BACKTRACKS: usize = 60;

/// Sum-rate maximization from each init; the best final sum rate wins.
pub fn maximize_sum_rate(
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    cfg: &BarrierConfig,
    inits: &[Precoder],
) -> Result<OptResult> {
    run_all(h, mode, scheme, cfg, inits, Target::SumRate)
}

/// Max-min fairness: every step refreshes the rates, re-solves the common
/// allocation and takes one ascent step on the smoothed minimum rate.
pub fn maximize_mmf(
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    cfg: &BarrierConfig,
    inits: &[Precoder],
) -> Result<OptResult> {
    run_all(h, mode, scheme, cfg, inits, Target::MaxMin)
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    SumRate,
    MaxMin,
}

fn run_all(
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    cfg: &BarrierConfig,
    inits: &[Precoder],
    target: Target,
) -> Result<OptResult> {
    cfg.validate()?;
    if inits.is_empty() {
        return Err(Error::InvalidParameter {
            name: "inits",
            reason: "at least one initial precoder is required".into(),
        });
    }
    let prob = Problem::new(h, mode, scheme);
    let mut best: Option<OptResult> = None;
    for init in inits {
        prob.check(init.matrix())?;
        if !init.is_interior() {
            return Err(Error::PowerBudget {
                power: init.power(),
                budget: init.budget(),
            });
        }
        let res = run_one(&prob, h, mode, cfg, init, target)?;
        if best.as_ref().is_none_or(|b| res.objective_bits > b.objective_bits) {
            best = Some(res);
        }
    }
    Ok(best.expect("inits is non-empty"))
}

fn barrier(tau: f64, f: f64, power: f64, budget: f64) -> f64 {
    tau * f + (budget - power).ln()
}

fn run_one(
    prob: &Problem<'_>,
    h: &ChannelRealization,
    mode: TransmissionMode,
    cfg: &BarrierConfig,
    init: &Precoder,
    target: Target,
) -> Result<OptResult> {
    let budget = init.budget();
    let mut p = init.matrix().clone();
    let mut trace = Vec::new();
    let mut converged = true;
    let mut tau = cfg.tau0;
    let mut outer = 0;
    let mut alloc = vec![1.0 / prob.users() as f64; prob.users()];

    loop {
        let mut step_scale: Option<f64> = None;
        let mut hit_cap = true;
        for inner in 1..=cfg.v_max {
            if target == Target::MaxMin {
                alloc = mmf_allocation(prob, &p)?;
            }
            let eval = |m: &DMatrix<C64>, grad: bool| match target {
                Target::SumRate => prob.sum_rate(m, grad),
                Target::MaxMin => prob.smoothed_min(m, &alloc, cfg.gamma, grad),
            };
            let power = p.norm_squared();
            let (f0, g) = eval(&p, true)?;
            let g = g.expect("gradient requested");
            let omega0 = barrier(tau, f0, power, budget);
            let inward = C64::new(1.0 / (power - budget), 0.0);
            debug_assert!(inward.re < 0.0);
            let dir = g * C64::new(tau, 0.0) + &p * inward;
            let dir_norm2 = dir.norm_squared();
            // directional derivative of the barrier objective along `dir`
            let slope = 2.0 * dir_norm2;
            if !(slope > 0.0) || !slope.is_finite() {
                hit_cap = false;
                break;
            }
            let mut alpha = match step_scale {
                Some(a) => 2.0 * a,
                None => 0.1 * budget.sqrt() / dir_norm2.sqrt(),
            };
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let trial = &p + &dir * C64::new(alpha, 0.0);
                let tp = trial.norm_squared();
                if tp < budget {
                    let (f1, _) = eval(&trial, false)?;
                    let omega1 = barrier(tau, f1, tp, budget);
                    if omega1 >= omega0 + cfg.armijo_c * alpha * slope {
                        accepted = Some((trial, f1, omega1, tp));
                        break;
                    }
                }
                alpha *= cfg.armijo_shrink;
            }
            let Some((trial, f1, omega1, tp)) = accepted else {
                hit_cap = false;
                break;
            };
            step_scale = Some(alpha);
            p = trial;
            trace.push(TraceEntry {
                outer,
                inner,
                barrier_before: omega0,
                barrier_after: omega1,
                objective_bits: f1 / std::f64::consts::LN_2,
                power: tp,
            });
            if (omega1 - omega0).abs() < cfg.eps {
                hit_cap = false;
                break;
            }
        }
        if hit_cap {
            converged = false;
        }
        if tau >= cfg.tau_max {
            break;
        }
        tau *= cfg.beta;
        outer += 1;
    }

    let precoder = Precoder::new(p, budget)?;
    let sr = stream_rates_unchecked(precoder.matrix(), h, mode, &RateMethod::Approx, NOISE_VARIANCE)?;
    let (allocation, objective_bits) = match target {
        Target::SumRate => {
            let c = if prob.scheme.is_conventional() {
                CommonAllocation::uniform(prob.users())
            } else {
                CommonAllocation::one_hot(prob.users(), argmax(&sr.common))
            };
            (c, sum_rate(prob.scheme, &sr))
        }
        Target::MaxMin => {
            let common = effective_common(prob.scheme, &sr);
            let (c, _) = allocate_common_mmf(&common, sr.private_for(prob.scheme))?;
            let min = user_rates(prob.scheme, &sr, &c)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            (c, min)
        }
    };
    Ok(OptResult {
        precoder,
        allocation,
        objective_bits,
        trace,
        converged,
    })
}

/// Allocation maximizing the minimum of the surrogate user rates at `p`.
fn mmf_allocation(prob: &Problem<'_>, p: &DMatrix<C64>) -> Result<Vec<f64>> {
    let rv = prob.evaluate(p, false)?;
    let common = if prob.scheme.is_conventional() {
        let m = rv.common.iter().copied().fold(f64::INFINITY, f64::min);
        vec![m; prob.users()]
    } else {
        rv.common.clone()
    };
    let clamp = |v: &[f64]| v.iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
    let (c, _) = allocate_common_mmf(&clamp(&common), &clamp(&rv.private))?;
    Ok(c.as_slice().to_vec())
}
