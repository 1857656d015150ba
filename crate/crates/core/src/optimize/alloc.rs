//! Closed-form common-stream allocation for max-min fairness.

use crate::rates::CommonAllocation;
use crate::{Error, Result};

/// Allocation `c` maximizing `min_k (c_k I'_c,k + I_p,k)` over the simplex, and
/// the achieved minimum `ξ`.
///
/// Users are taken in ascending order of private rate; the largest prefix
/// whose equalizing solution is non-negative receives the common stream.
pub fn allocate_common_mmf(i_c: &[f64], i_p: &[f64]) -> Result<(CommonAllocation, f64)> {
    let k = i_c.len();
    if k == 0 || i_p.len() != k {
        return Err(Error::Dimension(format!(
            "allocation needs matching non-empty rate lists, got {} and {}",
            k,
            i_p.len()
        )));
    }
    if i_c.iter().chain(i_p).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "rates",
            reason: "non-finite rate".into(),
        });
    }
    if i_c.iter().any(|&v| v <= 1e-12) {
        let xi = i_p.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok((CommonAllocation::uniform(k), xi));
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| i_p[a].total_cmp(&i_p[b]).then(a.cmp(&b)));

    for active in (1..=k).rev() {
        let set = &order[..active];
        let inv_sum: f64 = set.iter().map(|&u| 1.0 / i_c[u]).sum();
        let ratio_sum: f64 = set.iter().map(|&u| i_p[u] / i_c[u]).sum();
        let xi = (1.0 + ratio_sum) / inv_sum;
        let share: Vec<f64> = set.iter().map(|&u| (xi - i_p[u]) / i_c[u]).collect();
        if share.iter().all(|&s| s >= 0.0) {
            let mut c = vec![0.0; k];
            for (&u, &s) in set.iter().zip(&share) {
                c[u] = s;
            }
            let total: f64 = c.iter().sum();
            c.iter_mut().for_each(|v| *v /= total);
            return Ok((CommonAllocation::from_raw(c), xi));
        }
    }
    unreachable!("a single active user always has a non-negative share")
}
