//! Aggregated CSV reports over sweep rows.

use std::fmt::Write as _;

use crate::{Error, Result};

use super::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    /// Mean objective and standard error per (SNR, scheme).
    ErgodicCurve,
    /// Mean common and private contributions to the total user rate.
    StreamDecomposition,
    /// Mean objective of every mode and how often it was selected.
    ModeBreakdown,
}

/// Groups row indices by key in order of first appearance.
fn groups<K: PartialEq>(rows: &[SweepRow], key: impl Fn(&SweepRow) -> K) -> Vec<(K, Vec<&SweepRow>)> {
    let mut out: Vec<(K, Vec<&SweepRow>)> = Vec::new();
    for row in rows {
        let k = key(row);
        match out.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(row),
            None => out.push((k, vec![row])),
        }
    }
    out
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// CSV report of the given kind. Failed rows are counted but not averaged.
pub fn report(rows: &[SweepRow], kind: ReportKind) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter {
            name: "rows",
            reason: "cannot report on an empty sweep".into(),
        });
    }
    let by_point = groups(rows, |r| (r.snr_db.to_bits(), r.scheme));
    let mut out = String::new();
    match kind {
        ReportKind::ErgodicCurve => {
            out.push_str("# rsma-ergodic v1\nsnr_db,scheme,count,failed,mean_bits,stderr_bits\n");
            for ((snr, scheme), members) in &by_point {
                let ok: Vec<f64> = members.iter().filter(|r| r.error.is_none()).map(|r| r.objective_bits).collect();
                let (mean, se) = if ok.is_empty() { (f64::NAN, f64::NAN) } else { mean_stderr(&ok) };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    f64::from_bits(*snr),
                    scheme,
                    ok.len(),
                    members.len() - ok.len(),
                    mean,
                    se
                );
            }
        }
        ReportKind::StreamDecomposition => {
            out.push_str(
                "# rsma-decomposition v1\nsnr_db,scheme,count,common_bits,private_bits,total_bits,common_share\n",
            );
            for ((snr, scheme), members) in &by_point {
                let ok: Vec<&&SweepRow> = members.iter().filter(|r| r.error.is_none()).collect();
                let n = ok.len() as f64;
                let common = ok.iter().map(|r| r.common_rate_carried).sum::<f64>() / n;
                let private = ok.iter().map(|r| r.private_rate_sum).sum::<f64>() / n;
                let total = common + private;
                let share = if total > 0.0 { common / total } else { 0.0 };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    f64::from_bits(*snr),
                    scheme,
                    ok.len(),
                    common,
                    private,
                    total,
                    share
                );
            }
        }
        ReportKind::ModeBreakdown => {
            out.push_str("# rsma-modes v1\nsnr_db,scheme,mode,evaluated,selected,mean_bits\n");
            for ((snr, scheme), members) in &by_point {
                let mut names: Vec<_> = Vec::new();
                for r in members {
                    for (m, _) in &r.mode_objectives {
                        if !names.contains(m) {
                            names.push(*m);
                        }
                    }
                }
                for mode in names {
                    let vals: Vec<f64> = members
                        .iter()
                        .flat_map(|r| r.mode_objectives.iter())
                        .filter(|(m, v)| *m == mode && v.is_finite())
                        .map(|(_, v)| *v)
                        .collect();
                    let selected = members.iter().filter(|r| r.mode == Some(mode)).count();
                    let mean = if vals.is_empty() {
                        f64::NAN
                    } else {
                        vals.iter().sum::<f64>() / vals.len() as f64
                    };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        f64::from_bits(*snr),
                        scheme,
                        mode.name(),
                        vals.len(),
                        selected,
                        mean
                    );
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{ConstellationKind::*, TransmissionMode};
    use crate::harness::SweepScheme;
    use crate::rates::SchemeKind;

    fn row(snr: f64, obj: f64, common: f64) -> SweepRow {
        let mode = TransmissionMode::new(Qpsk, Bpsk);
        SweepRow {
            scheme: SweepScheme::Rsma(SchemeKind::Cs),
            mode: Some(mode),
            snr_db: snr,
            realization: 0,
            objective_bits: obj,
            approx_objective_bits: obj,
            user_rates: vec![obj / 2.0; 2],
            allocation: vec![1.0, 0.0],
            common_rate_carried: common,
            private_rate_sum: obj - common,
            mode_objectives: vec![(mode, obj)],
            converged: true,
            wall_time_ms: 0,
            seed: 0,
            error: None,
            trace: vec![],
        }
    }

    fn field(csv: &str, line: usize, col: usize) -> String {
        csv.lines().nth(line).unwrap().split(',').nth(col).unwrap().to_string()
    }

    #[test]
    fn single_row_curve() {
        let csv = report(&[row(5.0, 2.5, 0.5)], ReportKind::ErgodicCurve).unwrap();
        assert_eq!(field(&csv, 2, 4), "2.5");
        assert_eq!(field(&csv, 2, 5), "0");
    }

    #[test]
    fn mean_and_stderr() {
        let rows = [row(5.0, 1.0, 0.0), row(5.0, 3.0, 0.0), row(10.0, 4.0, 1.0)];
        let csv = report(&rows, ReportKind::ErgodicCurve).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(field(&csv, 2, 4), "2");
        assert_eq!(field(&csv, 2, 5), "1");
    }

    #[test]
    fn decomposition_shares_sum_to_total() {
        let rows = [row(5.0, 3.0, 1.0), row(5.0, 2.0, 0.25)];
        let csv = report(&rows, ReportKind::StreamDecomposition).unwrap();
        let c: f64 = field(&csv, 2, 3).parse().unwrap();
        let p: f64 = field(&csv, 2, 4).parse().unwrap();
        assert!((c + p - 2.5).abs() < 1e-12);
    }

    #[test]
    fn mode_breakdown_counts_selection() {
        let csv = report(&[row(5.0, 3.0, 1.0)], ReportKind::ModeBreakdown).unwrap();
        assert_eq!(field(&csv, 2, 2), "qpsk+bpsk");
        assert_eq!(field(&csv, 2, 4), "1");
    }

    #[test]
    fn empty_rejected() {
        assert!(report(&[], ReportKind::ErgodicCurve).is_err());
    }
}
