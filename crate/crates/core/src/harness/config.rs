//! Line-oriented experiment configuration: `key = value` pairs grouped under
//! `[section]` headers, `#` comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::alphabet::modes_for_complexity;
use crate::channel::{CovarianceVariant, OneRingParams, DEFAULT_QUADRATURE_POINTS};
use crate::gmi::{ExactSettings, ExponentGrouping};
use crate::optimize::{BarrierConfig, InitStrategy, Objective};
use crate::{Error, Result};

use super::SweepScheme;

/// How the final objective of each optimized precoder is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalMethod {
    Exact,
    Approx,
}

impl FinalMethod {
    pub fn name(self) -> &'static str {
        match self {
            FinalMethod::Exact => "exact",
            FinalMethod::Approx => "approx",
        }
    }
}

/// Everything needed to reproduce a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_t: usize,
    pub users: usize,
    pub theta: f64,
    pub delta_spread: f64,
    pub variant: CovarianceVariant,
    pub quadrature_points: usize,
    pub delta_complexity: usize,
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub schemes: Vec<SweepScheme>,
    pub objective: Objective,
    pub restarts: usize,
    pub init: InitStrategy,
    pub master_seed: u64,
    pub final_method: FinalMethod,
    pub exact: ExactSettings,
    pub barrier: BarrierConfig,
    pub dump_channels: bool,
    pub dump_traces: bool,
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Defaults for everything but the system size, SNR grid and seed.
    pub fn new(n_t: usize, users: usize, snr_db: Vec<f64>, master_seed: u64) -> Self {
        ExperimentConfig {
            n_t,
            users,
            theta: std::f64::consts::FRAC_PI_3,
            delta_spread: std::f64::consts::PI / 18.0,
            variant: CovarianceVariant::Standard,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
            delta_complexity: 16,
            snr_db,
            realizations: 20,
            schemes: vec![
                SweepScheme::Rsma(crate::rates::SchemeKind::Cs),
                SweepScheme::Rsma(crate::rates::SchemeKind::ConvNonSic),
                SweepScheme::Sdma,
            ],
            objective: Objective::SumRate,
            restarts: 3,
            init: InitStrategy::MrtPlusCommon,
            master_seed,
            final_method: FinalMethod::Exact,
            exact: ExactSettings::default(),
            barrier: BarrierConfig::default(),
            dump_channels: false,
            dump_traces: false,
            record_timing: false,
        }
    }

    pub fn one_ring(&self) -> OneRingParams {
        OneRingParams {
            quadrature_points: self.quadrature_points,
            ..OneRingParams::new(self.n_t, self.theta, self.delta_spread)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, reason: &str| Error::Config {
            line: 0,
            message: format!("{name}: {reason}"),
        };
        if self.n_t == 0 {
            return Err(field("n_t", "must be at least 1"));
        }
        if self.users == 0 {
            return Err(field("users", "must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(field("realizations", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(field("restarts", "must be at least 1"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(field("snr_db", "must be a non-empty list of finite values"));
        }
        if self.schemes.is_empty() {
            return Err(field("schemes", "must name at least one scheme"));
        }
        for (a, s) in self.schemes.iter().enumerate() {
            if self.schemes[..a].contains(s) {
                return Err(field("schemes", &format!("`{}` listed twice", s.name())));
            }
        }
        modes_for_complexity(self.delta_complexity)
            .map_err(|e| field("delta_complexity", &e.to_string()))?;
        self.one_ring().validate().map_err(|e| field("system", &e.to_string()))?;
        let named = |section: &str, e: Error| match e {
            Error::InvalidParameter { name: "s_range", reason } => field("s_min", &reason),
            Error::InvalidParameter { name, reason } => field(name, &reason),
            Error::TooFewSamples { .. } => field("mc_samples", &e.to_string()),
            other => field(section, &other.to_string()),
        };
        self.exact.validate().map_err(|e| named("gmi", e))?;
        self.barrier.validate().map_err(|e| named("optimizer", e))?;
        Ok(())
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "[system]");
        let _ = writeln!(out, "n_t = {}", self.n_t);
        let _ = writeln!(out, "users = {}", self.users);
        let _ = writeln!(out, "theta = {:?}", self.theta);
        let _ = writeln!(out, "delta_spread = {:?}", self.delta_spread);
        let _ = writeln!(out, "variant = {}", self.variant.name());
        let _ = writeln!(out, "quadrature_points = {}", self.quadrature_points);
        let _ = writeln!(out, "\n[sweep]");
        let _ = writeln!(out, "snr_db = {}", list(&self.snr_db));
        let _ = writeln!(out, "realizations = {}", self.realizations);
        let names: Vec<_> = self.schemes.iter().map(|s| s.name()).collect();
        let _ = writeln!(out, "schemes = {}", names.join(", "));
        let _ = writeln!(out, "objective = {}", self.objective.name());
        let _ = writeln!(out, "delta_complexity = {}", self.delta_complexity);
        let _ = writeln!(out, "restarts = {}", self.restarts);
        let init = match self.init {
            InitStrategy::MrtPlusCommon => "mrt_plus_common",
            InitStrategy::Random => "random",
        };
        let _ = writeln!(out, "init = {init}");
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        let _ = writeln!(out, "\n[gmi]");
        let _ = writeln!(out, "final_method = {}", self.final_method.name());
        let e = &self.exact;
        let _ = writeln!(out, "mc_samples = {}", e.mc_samples);
        let _ = writeln!(out, "s_min = {:?}", e.s_min);
        let _ = writeln!(out, "s_max = {:?}", e.s_max);
        let _ = writeln!(out, "s_grid_points = {}", e.grid_points);
        let _ = writeln!(out, "s_rel_tol = {:?}", e.rel_tol);
        let _ = writeln!(out, "s_grouping = {}", e.grouping.name());
        let b = &self.barrier;
        let _ = writeln!(out, "\n[optimizer]");
        let _ = writeln!(out, "tau0 = {:?}", b.tau0);
        let _ = writeln!(out, "beta = {:?}", b.beta);
        let _ = writeln!(out, "tau_max = {:?}", b.tau_max);
        let _ = writeln!(out, "eps = {:?}", b.eps);
        let _ = writeln!(out, "v_max = {}", b.v_max);
        let _ = writeln!(out, "armijo_c = {:?}", b.armijo_c);
        let _ = writeln!(out, "armijo_shrink = {:?}", b.armijo_shrink);
        let _ = writeln!(out, "gamma = {:?}", b.gamma);
        let _ = writeln!(out, "\n[output]");
        let _ = writeln!(out, "dump_channels = {}", self.dump_channels);
        let _ = writeln!(out, "dump_traces = {}", self.dump_traces);
        let _ = writeln!(out, "record_timing = {}", self.record_timing);
        out
    }
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "system",
        &["n_t", "users", "theta", "delta_spread", "variant", "quadrature_points"],
    ),
    (
        "sweep",
        &[
            "snr_db",
            "realizations",
            "schemes",
            "objective",
            "delta_complexity",
            "restarts",
            "init",
            "master_seed",
        ],
    ),
    (
        "gmi",
        &[
            "final_method",
            "mc_samples",
            "s_min",
            "s_max",
            "s_grid_points",
            "s_rel_tol",
            "s_grouping",
        ],
    ),
    (
        "optimizer",
        &["tau0", "beta", "tau_max", "eps", "v_max", "armijo_c", "armijo_shrink", "gamma"],
    ),
    ("output", &["dump_channels", "dump_traces", "record_timing"]),
];

const REQUIRED: &[(&str, &str)] = &[
    ("system", "n_t"),
    ("system", "users"),
    ("sweep", "snr_db"),
    ("sweep", "master_seed"),
];

struct Entry {
    value: String,
    line: usize,
}

/// Parses and validates a config; missing optional keys take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: HashMap<(String, String), Entry> = HashMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { line, message };
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(format!("malformed section header `{content}`")))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(format!("unknown section `[{name}]`")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let sec = section
            .as_deref()
            .ok_or_else(|| err(format!("key `{key}` appears before any section header")))?;
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == sec)
            .is_some_and(|(_, keys)| keys.contains(&key));
        if !known {
            return Err(err(format!("unknown key `{key}` in [{sec}]")));
        }
        let slot = (sec.to_string(), key.to_string());
        if let Some(prev) = entries.get(&slot) {
            return Err(err(format!(
                "duplicate key `{key}` in [{sec}] (lines {} and {line})",
                prev.line
            )));
        }
        entries.insert(
            slot,
            Entry {
                value: value.trim().to_string(),
                line,
            },
        );
    }

    for (sec, key) in REQUIRED {
        if !entries.contains_key(&(sec.to_string(), key.to_string())) {
            return Err(Error::Config {
                line: 0,
                message: format!("missing required key `{key}` in [{sec}]"),
            });
        }
    }

    let get = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string()));
    let n_t: usize = parse_at(get("system", "n_t").expect("required"), "n_t", parse_from_str)?;
    let users: usize = parse_at(get("system", "users").expect("required"), "users", parse_from_str)?;
    let snr_db = parse_at(get("sweep", "snr_db").expect("required"), "snr_db", parse_grid)?;
    let seed: u64 = parse_at(get("sweep", "master_seed").expect("required"), "master_seed", parse_from_str)?;
    let mut cfg = ExperimentConfig::new(n_t, users, snr_db, seed);

    macro_rules! set {
        ($sec:literal, $key:literal, $target:expr, $parser:expr) => {
            if let Some(e) = get($sec, $key) {
                $target = parse_at(e, $key, $parser)?;
            }
        };
    }
    set!("system", "theta", cfg.theta, parse_angle);
    set!("system", "delta_spread", cfg.delta_spread, parse_angle);
    set!("system", "variant", cfg.variant, parse_from_str);
    set!("system", "quadrature_points", cfg.quadrature_points, parse_from_str);
    set!("sweep", "realizations", cfg.realizations, parse_from_str);
    set!("sweep", "schemes", cfg.schemes, parse_list::<SweepScheme>);
    set!("sweep", "objective", cfg.objective, parse_from_str);
    set!("sweep", "delta_complexity", cfg.delta_complexity, parse_from_str);
    set!("sweep", "restarts", cfg.restarts, parse_from_str);
    set!("sweep", "init", cfg.init, parse_init);
    set!("gmi", "final_method", cfg.final_method, parse_final);
    set!("gmi", "mc_samples", cfg.exact.mc_samples, parse_from_str);
    set!("gmi", "s_min", cfg.exact.s_min, parse_from_str);
    set!("gmi", "s_max", cfg.exact.s_max, parse_from_str);
    set!("gmi", "s_grid_points", cfg.exact.grid_points, parse_from_str);
    set!("gmi", "s_rel_tol", cfg.exact.rel_tol, parse_from_str);
    set!("gmi", "s_grouping", cfg.exact.grouping, parse_from_str::<ExponentGrouping>);
    set!("optimizer", "tau0", cfg.barrier.tau0, parse_from_str);
    set!("optimizer", "beta", cfg.barrier.beta, parse_from_str);
    set!("optimizer", "tau_max", cfg.barrier.tau_max, parse_from_str);
    set!("optimizer", "eps", cfg.barrier.eps, parse_from_str);
    set!("optimizer", "v_max", cfg.barrier.v_max, parse_from_str);
    set!("optimizer", "armijo_c", cfg.barrier.armijo_c, parse_from_str);
    set!("optimizer", "armijo_shrink", cfg.barrier.armijo_shrink, parse_from_str);
    set!("optimizer", "gamma", cfg.barrier.gamma, parse_from_str);
    set!("output", "dump_channels", cfg.dump_channels, parse_from_str);
    set!("output", "dump_traces", cfg.dump_traces, parse_from_str);
    set!("output", "record_timing", cfg.record_timing, parse_from_str);

    cfg.validate().map_err(|e| match e {
        Error::Config { message, .. } => {
            let field = message.split(':').next().unwrap_or("");
            let line = KEYS
                .iter()
                .find_map(|(sec, keys)| keys.contains(&field).then(|| get(sec, field)))
                .flatten()
                .map_or(0, |e| e.line);
            Error::Config { line, message }
        }
        other => other,
    })?;
    Ok(cfg)
}

fn parse_at<T>(e: &Entry, key: &str, parser: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
    parser(&e.value).map_err(|reason| Error::Config {
        line: e.line,
        message: format!("{key}: {reason}"),
    })
}

fn parse_from_str<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("cannot parse `{s}`: {e}"))
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_from_str)
        .collect()
}

/// Either `start:step:stop` (inclusive) or a comma-separated list.
fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) =
                (parse_from_str(start)?, parse_from_str(step)?, parse_from_str(stop)?);
            if !(step > 0.0) || stop < start {
                return Err(format!("range `{s}` needs a positive step and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| start + step * k as f64).collect())
        }
        [_] => parse_list(s),
        _ => Err(format!("range `{s}` must be start:step:stop")),
    }
}

/// Radians, or a multiple/fraction of `pi` such as `pi/18` or `2*pi/3`.
fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = compact.find("pi") else {
        return parse_from_str(&compact);
    };
    let (head, tail) = (&compact[..pos], &compact[pos + 2..]);
    let factor = match head.strip_suffix('*') {
        Some(num) => parse_from_str::<f64>(num)?,
        None if head.is_empty() => 1.0,
        None => return Err(format!("cannot parse angle `{s}`")),
    };
    let divisor = match tail.strip_prefix('/') {
        Some(den) => parse_from_str::<f64>(den)?,
        None if tail.is_empty() => 1.0,
        None => return Err(format!("cannot parse angle `{s}`")),
    };
    Ok(factor * std::f64::consts::PI / divisor)
}

fn parse_init(s: &str) -> std::result::Result<InitStrategy, String> {
    match s {
        "mrt_plus_common" => Ok(InitStrategy::MrtPlusCommon),
        "random" => Ok(InitStrategy::Random),
        other => Err(format!("unknown init strategy `{other}`")),
    }
}

fn parse_final(s: &str) -> std::result::Result<FinalMethod, String> {
    match s {
        "exact" => Ok(FinalMethod::Exact),
        "approx" => Ok(FinalMethod::Approx),
        other => Err(format!("unknown final method `{other}`")),
    }
}
