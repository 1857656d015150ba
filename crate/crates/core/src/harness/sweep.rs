//! Parallel ergodic sweep.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::alphabet::{modes_for_complexity, TransmissionMode};
use crate::channel::{one_ring_covariance, sample_channels, ChannelRealization};
use crate::optimize::{
    allocate_common_mmf, init_precoders, maximize_mmf, maximize_sum_rate, power_budget,
    select_best, Objective, OptResult, Precoder, NOISE_VARIANCE,
};
use crate::rates::{
    argmax, effective_common, scheme_stream_rates, sum_rate, user_rates, CommonAllocation,
    RateMethod, SchemeKind,
};
use crate::{seed, Result};

use super::{report, ExperimentConfig, FinalMethod, ReportKind, SweepRow, SweepScheme};

const INIT_STREAM: u64 = 1;
const EXACT_STREAM: u64 = 2;

/// Final rates of one optimized precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalEval {
    pub objective_bits: f64,
    pub user_rates: Vec<f64>,
    pub allocation: CommonAllocation,
    pub common_rate_carried: f64,
    pub private_rate_sum: f64,
}

/// Evaluates a precoder under `method`, re-optimizing the allocation for the
/// objective: one-hot on the best common rate for CS sum rate, the max-min
/// allocation for fairness.
pub fn evaluate_final(
    p: &Precoder,
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    objective: Objective,
    method: &RateMethod,
) -> Result<FinalEval> {
    let sr = scheme_stream_rates(p.matrix(), h, mode, scheme, method, NOISE_VARIANCE)?;
    let common = effective_common(scheme, &sr);
    let private = sr.private_for(scheme);
    let (allocation, objective_bits) = match objective {
        Objective::SumRate => {
            let c = if scheme.is_conventional() {
                CommonAllocation::uniform(sr.users())
            } else {
                CommonAllocation::one_hot(sr.users(), argmax(&sr.common))
            };
            (c, sum_rate(scheme, &sr))
        }
        Objective::MaxMin => {
            let (c, _) = allocate_common_mmf(&common, private)?;
            let min = user_rates(scheme, &sr, &c)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            (c, min)
        }
    };
    let rates = user_rates(scheme, &sr, &allocation);
    let common_rate_carried = allocation.as_slice().iter().zip(&common).map(|(c, r)| c * r).sum();
    Ok(FinalEval {
        objective_bits,
        user_rates: rates,
        allocation,
        common_rate_carried,
        private_rate_sum: private.iter().sum(),
    })
}

/// Rows plus the channel realizations they were computed on.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub channels: Vec<ChannelRealization>,
}

struct ModeRun {
    result: Result<(OptResult, FinalEval)>,
    millis: u64,
}

/// Problems that differ only in scheme name are solved once: without a
/// common stream, every SIC-free scheme optimizes the same objective.
fn problem_key(mode: &TransmissionMode, scheme: SchemeKind) -> SchemeKind {
    if mode.common_alphabet().is_null() && !scheme.uses_sic() {
        SchemeKind::ConvNonSic
    } else {
        scheme
    }
}

/// Runs every (SNR, realization) point and returns rows in canonical order:
/// SNR, then realization, then scheme in config order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let factor = one_ring_covariance(&cfg.one_ring(), cfg.variant)?;
    let factors = vec![factor; cfg.users];
    let channels: Vec<ChannelRealization> = (0..cfg.realizations)
        .map(|r| sample_channels(&factors, seed::mix(cfg.master_seed, r as u64)))
        .collect::<Result<_>>()?;
    let modes = modes_for_complexity(cfg.delta_complexity)?;

    let points: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.realizations).map(move |r| (s, r)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(s, r)| run_point(cfg, &modes, &channels[r], s, r))
        .collect();
    Ok(SweepOutput {
        config: cfg.clone(),
        rows: rows.into_iter().flatten().collect(),
        channels,
    })
}

fn run_point(
    cfg: &ExperimentConfig,
    modes: &[TransmissionMode],
    h: &ChannelRealization,
    snr_idx: usize,
    realization: usize,
) -> Vec<SweepRow> {
    let snr = cfg.snr_db[snr_idx];
    let p_t = power_budget(snr);
    let point = [snr_idx as u64, realization as u64];
    let init_seed = seed::mix_all(cfg.master_seed, &[INIT_STREAM, point[0], point[1]]);
    let inits = init_precoders(h, p_t, cfg.init, cfg.restarts, init_seed);
    let mut cache: HashMap<(usize, SchemeKind), ModeRun> = HashMap::new();

    let mut rows = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let kind = scheme.kind();
        let mut tried = Vec::new();
        for (m, mode) in modes.iter().enumerate() {
            if !scheme.admits(mode) {
                continue;
            }
            let key = (m, problem_key(mode, kind));
            cache.entry(key).or_insert_with(|| {
                let start = Instant::now();
                let exact_seed =
                    seed::mix_all(cfg.master_seed, &[EXACT_STREAM, point[0], point[1], m as u64]);
                let result = inits.clone().and_then(|inits| {
                    solve_mode(cfg, h, *mode, key.1, &inits, exact_seed)
                });
                ModeRun {
                    result,
                    millis: start.elapsed().as_millis() as u64,
                }
            });
            tried.push((m, key));
        }
        rows.push(build_row(cfg, scheme, modes, &tried, &cache, snr, realization, h.seed_record));
    }
    rows
}

fn solve_mode(
    cfg: &ExperimentConfig,
    h: &ChannelRealization,
    mode: TransmissionMode,
    scheme: SchemeKind,
    inits: &[Precoder],
    exact_seed: u64,
) -> Result<(OptResult, FinalEval)> {
    let adapted: Vec<Precoder> = inits.iter().map(|p| p.for_mode(&mode)).collect();
    let opt = match cfg.objective {
        Objective::SumRate => maximize_sum_rate(h, mode, scheme, &cfg.barrier, &adapted)?,
        Objective::MaxMin => maximize_mmf(h, mode, scheme, &cfg.barrier, &adapted)?,
    };
    let method = match cfg.final_method {
        FinalMethod::Exact => RateMethod::Exact {
            settings: cfg.exact,
            seed: exact_seed,
        },
        FinalMethod::Approx => RateMethod::Approx,
    };
    let eval = evaluate_final(&opt.precoder, h, mode, scheme, cfg.objective, &method)?;
    Ok((opt, eval))
}

#[allow(clippy::too_many_arguments)]
fn build_row(
    cfg: &ExperimentConfig,
    scheme: SweepScheme,
    modes: &[TransmissionMode],
    tried: &[(usize, (usize, SchemeKind))],
    cache: &HashMap<(usize, SchemeKind), ModeRun>,
    snr_db: f64,
    realization: usize,
    seed: u64,
) -> SweepRow {
    let runs: Vec<&ModeRun> = tried.iter().map(|(_, key)| &cache[key]).collect();
    let scores: Vec<Option<f64>> = runs
        .iter()
        .map(|r| r.result.as_ref().ok().map(|(_, e)| e.objective_bits))
        .collect();
    let mode_objectives = tried
        .iter()
        .zip(&scores)
        .map(|((m, _), s)| (modes[*m], s.unwrap_or(f64::NAN)))
        .collect();
    let wall_time_ms = if cfg.record_timing {
        runs.iter().map(|r| r.millis).sum()
    } else {
        0
    };
    let mut row = SweepRow {
        scheme,
        mode: None,
        snr_db,
        realization,
        objective_bits: 0.0,
        approx_objective_bits: 0.0,
        user_rates: vec![],
        allocation: vec![],
        common_rate_carried: 0.0,
        private_rate_sum: 0.0,
        mode_objectives,
        converged: false,
        wall_time_ms,
        seed,
        error: None,
        trace: vec![],
    };
    match select_best(&scores) {
        Some(best) => {
            let (opt, eval) = runs[best].result.as_ref().expect("selected run succeeded");
            row.mode = Some(modes[tried[best].0]);
            row.objective_bits = eval.objective_bits;
            row.approx_objective_bits = opt.objective_bits;
            row.user_rates = eval.user_rates.clone();
            row.allocation = eval.allocation.as_slice().to_vec();
            row.common_rate_carried = eval.common_rate_carried;
            row.private_rate_sum = eval.private_rate_sum;
            row.converged = opt.converged;
            row.trace = opt.trace.clone();
        }
        None => {
            let msg = runs
                .iter()
                .find_map(|r| r.result.as_ref().err())
                .map_or_else(|| "no admissible mode".to_string(), |e| e.to_string());
            row.error = Some(msg);
        }
    }
    row
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// Rows CSV with a versioned schema line.
pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("# rsma-sweep-rows v1\n");
    out.push_str(
        "snr_db,realization,scheme,mode,objective_bits,approx_objective_bits,user_rates,allocation,\
         common_rate_carried,private_rate_sum,mode_objectives,converged,wall_time_ms,seed,error\n",
    );
    for r in rows {
        let modes: Vec<String> = r
            .mode_objectives
            .iter()
            .map(|(m, v)| format!("{}={}", m.name(), v))
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.realization,
            r.scheme,
            r.mode.map(|m| m.name()).unwrap_or_default(),
            r.objective_bits,
            r.approx_objective_bits,
            join(&r.user_rates),
            join(&r.allocation),
            r.common_rate_carried,
            r.private_rate_sum,
            modes.join(";"),
            r.converged,
            r.wall_time_ms,
            r.seed,
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    out
}

fn traces_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("# rsma-traces v1\n");
    out.push_str("snr_db,realization,scheme,outer,inner,objective_bits,barrier_before,barrier_after\n");
    for r in rows {
        for t in &r.trace {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.snr_db, r.realization, r.scheme, t.outer, t.inner, t.objective_bits, t.barrier_before, t.barrier_after
            );
        }
    }
    out
}

/// Writes `rows.csv`, `summary.csv`, the decomposition and mode reports, the
/// canonical config and, when enabled, channels and traces.
pub fn write_sweep(output: &SweepOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), output.config.to_text())?;
    fs::write(dir.join("rows.csv"), rows_csv(&output.rows))?;
    fs::write(dir.join("summary.csv"), report(&output.rows, ReportKind::ErgodicCurve)?)?;
    fs::write(
        dir.join("decomposition.csv"),
        report(&output.rows, ReportKind::StreamDecomposition)?,
    )?;
    fs::write(dir.join("modes.csv"), report(&output.rows, ReportKind::ModeBreakdown)?)?;
    if output.config.dump_traces {
        fs::write(dir.join("traces.csv"), traces_csv(&output.rows))?;
    }
    if output.config.dump_channels {
        let chan_dir = dir.join("channels");
        fs::create_dir_all(&chan_dir)?;
        for (r, h) in output.channels.iter().enumerate() {
            h.save(&chan_dir.join(format!("realization_{r:04}.csv")))?;
        }
    }
    Ok(())
}
