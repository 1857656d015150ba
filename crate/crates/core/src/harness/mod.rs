//! Experiment configs, ergodic sweeps over SNR and channel realizations, and
//! plot-ready CSV reports.

mod config;
mod report;
mod sweep;

pub use config::{parse_config, ExperimentConfig, FinalMethod};
pub use report::{report, ReportKind};
pub use sweep::{evaluate_final, run_sweep, write_sweep, FinalEval, SweepOutput};

use std::fmt;
use std::str::FromStr;

use crate::alphabet::TransmissionMode;
use crate::optimize::TraceEntry;
use crate::rates::SchemeKind;
use crate::{Error, Result};

/// Scheme column of a sweep: an RSMA scheme searched over every admissible
/// mode, or SDMA (private streams only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepScheme {
    Rsma(SchemeKind),
    Sdma,
}

impl SweepScheme {
    pub fn name(self) -> &'static str {
        match self {
            SweepScheme::Rsma(k) => k.name(),
            SweepScheme::Sdma => "sdma",
        }
    }

    /// Rate rules used for evaluation.
    pub fn kind(self) -> SchemeKind {
        match self {
            SweepScheme::Rsma(k) => k,
            SweepScheme::Sdma => SchemeKind::ConvNonSic,
        }
    }

    pub fn admits(self, mode: &TransmissionMode) -> bool {
        match self {
            SweepScheme::Rsma(_) => true,
            SweepScheme::Sdma => mode.is_sdma(),
        }
    }
}

impl fmt::Display for SweepScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "sdma" {
            return Ok(SweepScheme::Sdma);
        }
        s.parse().map(SweepScheme::Rsma)
    }
}

/// Result for one (SNR, realization, scheme).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SweepScheme,
    /// Selected mode; `None` when every mode failed.
    pub mode: Option<TransmissionMode>,
    pub snr_db: f64,
    pub realization: usize,
    /// Final objective (sum rate or minimum user rate) in bits.
    pub objective_bits: f64,
    /// Objective of the selected precoder under the approximation.
    pub approx_objective_bits: f64,
    pub user_rates: Vec<f64>,
    pub allocation: Vec<f64>,
    /// Part of the total user rate delivered through the common stream.
    pub common_rate_carried: f64,
    pub private_rate_sum: f64,
    /// Final objective of every mode tried (NaN where the mode failed).
    pub mode_objectives: Vec<(TransmissionMode, f64)>,
    pub converged: bool,
    pub wall_time_ms: u64,
    /// Channel seed of the realization.
    pub seed: u64,
    pub error: Option<String>,
    /// Ascent trace of the selected run.
    pub trace: Vec<TraceEntry>,
}

impl SweepRow {
    /// Sum of the user rates.
    pub fn total_rate(&self) -> f64 {
        self.common_rate_carried + self.private_rate_sum
    }
}
