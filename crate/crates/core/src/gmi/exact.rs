//! Monte-Carlo evaluation of the exact GMI with a supremum over `s`.
//!
//! One table of noise samples is drawn per call and shared by every
//! `(x, i, j)` term and every candidate `s` (common random numbers). The
//! `s`-independent inner log-sums are computed once, so each candidate `s`
//! only costs one log-sum-exp per term and sample.

use std::f64::consts::LN_2;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{log_sum_exp, EffectiveChannel};
use crate::alphabet::{Alphabet, VectorAlphabet};
use crate::{seed, Error, Result, C64};

/// Minimum accepted number of noise samples.
pub const MIN_MC_SAMPLES: usize = 100;

/// Placement of the exponent `s` in the second (interference-only) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExponentGrouping {
    /// `log (Σ_ī exp(·))^s`, the form that follows from the decoding metric;
    /// tends to 0 as `s -> 0`.
    #[default]
    SumThenPower,
    /// `log Σ_ī exp(·)^s` with the exponent applied per summand.
    PerTerm,
}

impl ExponentGrouping {
    pub fn name(self) -> &'static str {
        match self {
            ExponentGrouping::SumThenPower => "sum_then_power",
            ExponentGrouping::PerTerm => "per_term",
        }
    }
}

impl std::str::FromStr for ExponentGrouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sum_then_power" => Ok(ExponentGrouping::SumThenPower),
            "per_term" | "printed" => Ok(ExponentGrouping::PerTerm),
            other => Err(Error::InvalidParameter {
                name: "s_grouping",
                reason: format!("expected `sum_then_power` or `per_term`, got `{other}`"),
            }),
        }
    }
}

/// Numerical settings of the exact evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSettings {
    pub mc_samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub grid_points: usize,
    /// Relative bracket width at which golden-section refinement stops.
    pub rel_tol: f64,
    pub grouping: ExponentGrouping,
}

impl Default for ExactSettings {
    fn default() -> Self {
        ExactSettings {
            mc_samples: 2000,
            s_min: 0.05,
            s_max: 5.0,
            grid_points: 17,
            rel_tol: 1e-3,
            grouping: ExponentGrouping::SumThenPower,
        }
    }
}

impl ExactSettings {
    pub fn with_samples(mc_samples: usize) -> Self {
        ExactSettings {
            mc_samples,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_samples < MIN_MC_SAMPLES {
            return Err(Error::TooFewSamples {
                got: self.mc_samples,
                min: MIN_MC_SAMPLES,
            });
        }
        if !(self.s_min > 0.0 && self.s_max > self.s_min) {
            return Err(Error::InvalidParameter {
                name: "s_range",
                reason: format!("need 0 < s_min < s_max, got [{}, {}]", self.s_min, self.s_max),
            });
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidParameter {
                name: "s_grid_points",
                reason: "need at least 3 grid points".into(),
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter {
                name: "s_rel_tol",
                reason: format!("must lie in (0, 1), got {}", self.rel_tol),
            });
        }
        Ok(())
    }

    /// Log-spaced candidate grid on `[s_min, s_max]`.
    pub fn s_grid(&self) -> Vec<f64> {
        let ratio = self.s_max / self.s_min;
        (0..self.grid_points)
            .map(|k| self.s_min * ratio.powf(k as f64 / (self.grid_points - 1) as f64))
            .collect()
    }
}

/// Monte-Carlo GMI estimate in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmiEstimate {
    pub value_bits: f64,
    pub s_opt: f64,
    pub mc_std_error_bits: f64,
    pub samples: usize,
}

/// Exact GMI: Monte-Carlo expectation and supremum over `s` (log grid, the
/// point `s = 1`, then golden-section refinement around the best grid point).
pub fn gmi_exact(
    eff: &EffectiveChannel,
    x: &Alphabet,
    i: &VectorAlphabet,
    j: &VectorAlphabet,
    settings: &ExactSettings,
    rng_seed: u64,
) -> Result<GmiEstimate> {
    settings.validate()?;
    eff.check(x, i, j)?;
    let table = McTable::build(eff, x, i, j, settings.mc_samples, rng_seed);
    let f = |s: f64| table.mean(s, settings.grouping);

    let grid = settings.s_grid();
    let mut evaluated: Vec<(f64, f64)> = grid.iter().map(|&s| (s, f(s))).collect();
    let best = evaluated
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > settings.rel_tol * 0.5 * (hi + lo) {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    evaluated.push((c, fc));
    evaluated.push((d, fd));
    evaluated.push((1.0, f(1.0)));
    let (s_opt, _) = evaluated
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty candidate set");
    Ok(table.estimate(s_opt, settings.grouping))
}

/// Exact GMI at a fixed `s` (no supremum).
pub fn gmi_exact_at(
    eff: &EffectiveChannel,
    x: &Alphabet,
    i: &VectorAlphabet,
    j: &VectorAlphabet,
    s: f64,
    settings: &ExactSettings,
    rng_seed: u64,
) -> Result<GmiEstimate> {
    settings.validate()?;
    eff.check(x, i, j)?;
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("must be non-negative, got {s}"),
        });
    }
    let table = McTable::build(eff, x, i, j, settings.mc_samples, rng_seed);
    Ok(table.estimate(s, settings.grouping))
}

/// Per-sample, `s`-independent log-sums.
struct McTable {
    samples: usize,
    nx: usize,
    /// Outer `(x, i, j)` terms per sample.
    n_outer: usize,
    /// `(i, j)` terms per sample.
    n_pairs: usize,
    ni: usize,
    /// `[sample][(x,i,j)]` -> the largest `log Σ_ī exp(arg)` over `x̄`, then
    /// the offsets of the others from it in descending order.
    inner: Vec<f64>,
    /// `[sample][(i,j)] -> log Σ_ī exp(arg)` of the interference-only term.
    pair_lse: Vec<f64>,
    /// `[sample][(i,j)][ī] -> arg`, needed by the per-term grouping.
    pair_args: Vec<f64>,
}

/// Terms below `exp(-45)` relative to the leading one do not change a
/// double-precision sum of at most a few hundred terms.
const NEGLIGIBLE_EXPONENT: f64 = -45.0;

/// Rewrites `v` as `[max, v_k - max...]` with the offsets sorted descending.
fn sort_offsets(v: &mut [f64]) {
    let top = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    v.swap(0, top);
    let max = v[0];
    for d in &mut v[1..] {
        *d -= max;
    }
    v[1..].sort_unstable_by(|a, b| b.total_cmp(a));
}

impl McTable {
    fn build(
        eff: &EffectiveChannel,
        x: &Alphabet,
        i: &VectorAlphabet,
        j: &VectorAlphabet,
        samples: usize,
        rng_seed: u64,
    ) -> McTable {
        let proj = eff.projections(x, i, j);
        let denom = eff.gaussian_power() + eff.sigma2;
        let (nx, ni, nj) = (x.order(), i.len(), j.len());
        let n_outer = nx * ni * nj;
        let n_pairs = ni * nj;

        let mut rng = seed::rng(rng_seed);
        let scale = (0.5 * eff.sigma2).sqrt();
        let noise: Vec<C64> = (0..samples)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im) * scale
            })
            .collect();

        let mut inner = vec![0.0; samples * n_outer * nx];
        inner
            .par_chunks_mut(n_outer * nx)
            .zip(noise.par_iter())
            .for_each(|(chunk, &n)| {
                let mut args = vec![0.0; ni];
                for xi in 0..nx {
                    for ii in 0..ni {
                        for jj in 0..nj {
                            let outer = (xi * ni + ii) * nj + jj;
                            let base = proj.ax[xi] + proj.bi[ii] + proj.cj[jj] + n;
                            for xb in 0..nx {
                                let shifted = base - proj.ax[xb];
                                for (ib, arg) in args.iter_mut().enumerate() {
                                    *arg = -(shifted - proj.bi[ib]).norm_sqr() / denom;
                                }
                                chunk[outer * nx + xb] = if ni == 1 { args[0] } else { log_sum_exp(&args) };
                            }
                            sort_offsets(&mut chunk[outer * nx..(outer + 1) * nx]);
                        }
                    }
                }
            });

        let mut pair_args = vec![0.0; samples * n_pairs * ni];
        let mut pair_lse = vec![0.0; samples * n_pairs];
        pair_args
            .par_chunks_mut(n_pairs * ni)
            .zip(pair_lse.par_chunks_mut(n_pairs))
            .zip(noise.par_iter())
            .for_each(|((args, lse), &n)| {
                for ii in 0..ni {
                    for jj in 0..nj {
                        let pair = ii * nj + jj;
                        let base = proj.bi[ii] + proj.cj[jj] + n;
                        let slot = &mut args[pair * ni..(pair + 1) * ni];
                        for (ib, arg) in slot.iter_mut().enumerate() {
                            *arg = -(base - proj.bi[ib]).norm_sqr() / denom;
                        }
                        lse[pair] = if ni == 1 { slot[0] } else { log_sum_exp(slot) };
                    }
                }
            });

        McTable {
            samples,
            nx,
            n_outer,
            n_pairs,
            ni,
            inner,
            pair_lse,
            pair_args,
        }
    }

    /// GMI (nats) for each noise sample at the given `s`.
    fn per_sample(&self, s: f64, grouping: ExponentGrouping) -> Vec<f64> {
        let log_nx = (self.nx as f64).ln();
        (0..self.samples)
            .into_par_iter()
            .map_init(
                || vec![0.0; self.nx.max(self.ni)],
                |buf, t| {
                    let block = &self.inner[t * self.n_outer * self.nx..(t + 1) * self.n_outer * self.nx];
                    let mut first = 0.0;
                    for outer in block.chunks(self.nx) {
                        let mut tail = 0.0;
                        for &d in &outer[1..] {
                            let arg = s * d;
                            if arg < NEGLIGIBLE_EXPONENT {
                                break;
                            }
                            tail += arg.exp();
                        }
                        first += s * outer[0] + tail.ln_1p();
                    }
                    let second: f64 = match grouping {
                        ExponentGrouping::SumThenPower => self.pair_lse
                            [t * self.n_pairs..(t + 1) * self.n_pairs]
                            .iter()
                            .map(|l| s * l)
                            .sum(),
                        ExponentGrouping::PerTerm => self.pair_args
                            [t * self.n_pairs * self.ni..(t + 1) * self.n_pairs * self.ni]
                            .chunks(self.ni)
                            .map(|args| {
                                for (b, a) in buf.iter_mut().zip(args) {
                                    *b = s * a;
                                }
                                log_sum_exp(&buf[..self.ni])
                            })
                            .sum(),
                    };
                    log_nx - first / self.n_outer as f64 + second / self.n_pairs as f64
                },
            )
            .collect()
    }

    fn mean(&self, s: f64, grouping: ExponentGrouping) -> f64 {
        // sequential sum keeps the result independent of the thread count
        self.per_sample(s, grouping).iter().sum::<f64>() / self.samples as f64
    }

    fn estimate(&self, s: f64, grouping: ExponentGrouping) -> GmiEstimate {
        let values = self.per_sample(s, grouping);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let (value, s_opt, se) = if mean > 0.0 {
            (mean, s, (var / n).sqrt())
        } else {
            // the supremum over s >= 0 is at least the value 0 reached as s -> 0
            (0.0, 0.0, 0.0)
        };
        GmiEstimate {
            value_bits: value / LN_2,
            s_opt,
            mc_std_error_bits: se / LN_2,
            samples: self.samples,
        }
    }
}
