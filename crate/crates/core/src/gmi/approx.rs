//! Closed-form GMI approximation and its gradient.
//!
//! The noise expectation is removed by evaluating the metric at the noiseless
//! received point with the Gaussian variance doubled (`‖C‖² + 2σ²`).

use nalgebra::{DMatrix, DVector};

use super::{log_sum_exp, EffectiveChannel, StackedPrecoder};
use crate::alphabet::{Alphabet, VectorAlphabet};
use crate::{Result, C64};

/// Approximate GMI in nats, without clamping.
pub fn gmi_approx_nats(
    eff: &EffectiveChannel,
    x: &Alphabet,
    i: &VectorAlphabet,
    j: &VectorAlphabet,
) -> Result<f64> {
    Ok(approx_value_and_row(eff, x, i, j, false)?.0)
}

/// Approximate GMI in bits, clamped to `[0, log2|X|]`.
pub fn gmi_approx(
    eff: &EffectiveChannel,
    x: &Alphabet,
    i: &VectorAlphabet,
    j: &VectorAlphabet,
) -> Result<f64> {
    let nats = gmi_approx_nats(eff, x, i, j)?;
    Ok((nats / std::f64::consts::LN_2).clamp(0.0, x.bits()))
}

/// Gradient of the approximation (nats) with respect to the stacked precoder,
/// in the conjugate Wirtinger convention: for a perturbation `E` the
/// directional derivative is `2 Re tr(E^H G)`.
pub fn gmi_approx_grad(
    h: &DVector<C64>,
    sp: &StackedPrecoder,
    x: &Alphabet,
    i: &VectorAlphabet,
    j: &VectorAlphabet,
    sigma2: f64,
) -> Result<DMatrix<C64>> {
    let eff = EffectiveChannel::from_stacked(h, sp, sigma2)?;
    let (_, row) = approx_value_and_row(&eff, x, i, j, true)?;
    let row = row.expect("gradient requested");
    Ok(DMatrix::from_fn(h.len(), sp.width(), |r, c| h[r] * row[c]))
}

/// Approximate GMI (nats) and, optionally, the row vector `ρ` such that the
/// gradient with respect to `P̃` is the outer product `h ρ^T`.
///
/// `ρ` is laid out as `[x | i-block | j-block]`.
pub fn approx_value_and_row(
    eff: &EffectiveChannel,
    x: &Alphabet,
    i: &VectorAlphabet,
    j: &VectorAlphabet,
    with_grad: bool,
) -> Result<(f64, Option<Vec<C64>>)> {
    eff.check(x, i, j)?;
    let width = 1 + i.dims() + j.dims();
    // A single-point desired alphabet carries nothing: both averages coincide.
    if x.order() == 1 {
        return Ok((0.0, with_grad.then(|| vec![C64::new(0.0, 0.0); width])));
    }
    let proj = eff.projections(x, i, j);
    let denom = eff.gaussian_power() + 2.0 * eff.sigma2;
    let nx = x.order();
    let ni = i.len();
    let nj = j.len();

    let mut row = vec![C64::new(0.0, 0.0); width];
    let mut args = vec![0.0; nx * ni];
    let mut us = vec![C64::new(0.0, 0.0); nx * ni];
    let mut sx = vec![C64::new(0.0, 0.0); nx];
    let mut si = vec![C64::new(0.0, 0.0); ni];

    let conj_points: Vec<C64> = x.points().iter().map(|p| p.conj()).collect();

    // First average: over (x, i, j), inner sum over (x̄, ī).
    let mut first = 0.0;
    for xi in 0..nx {
        for ii in 0..ni {
            for jj in 0..nj {
                let base = proj.ax[xi] + proj.bi[ii] + proj.cj[jj];
                for xb in 0..nx {
                    for ib in 0..ni {
                        let u = base - proj.ax[xb] - proj.bi[ib];
                        us[xb * ni + ib] = u;
                        args[xb * ni + ib] = -u.norm_sqr() / denom;
                    }
                }
                let lse = log_sum_exp(&args);
                first += lse;
                if with_grad {
                    sx.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    si.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    let (mut s1_tot, mut s2_tot) = (C64::new(0.0, 0.0), 0.0);
                    for xb in 0..nx {
                        for ib in 0..ni {
                            let k = xb * ni + ib;
                            let w = (args[k] - lse).exp();
                            let s1 = us[k] * (-w / denom);
                            s1_tot += s1;
                            s2_tot += w * us[k].norm_sqr() / (denom * denom);
                            sx[xb] += s1;
                            si[ib] += s1;
                        }
                    }
                    accumulate_row(
                        &mut row,
                        -1.0,
                        Some((conj_points[xi], &conj_points, &sx)),
                        &i.vectors()[ii],
                        i.vectors(),
                        &si,
                        &j.vectors()[jj],
                        &eff.c,
                        s1_tot,
                        s2_tot,
                    );
                }
            }
        }
    }
    let n1 = (nx * ni * nj) as f64;
    first /= n1;

    // Second average: over (i, j), inner sum over ī.
    let mut second = 0.0;
    let mut row2 = vec![C64::new(0.0, 0.0); width];
    let mut args_i = vec![0.0; ni];
    let mut us_i = vec![C64::new(0.0, 0.0); ni];
    for ii in 0..ni {
        for jj in 0..nj {
            let base = proj.bi[ii] + proj.cj[jj];
            for ib in 0..ni {
                let u = base - proj.bi[ib];
                us_i[ib] = u;
                args_i[ib] = -u.norm_sqr() / denom;
            }
            let lse = log_sum_exp(&args_i);
            second += lse;
            if with_grad {
                let (mut s1_tot, mut s2_tot) = (C64::new(0.0, 0.0), 0.0);
                for ib in 0..ni {
                    let w = (args_i[ib] - lse).exp();
                    let s1 = us_i[ib] * (-w / denom);
                    s1_tot += s1;
                    s2_tot += w * us_i[ib].norm_sqr() / (denom * denom);
                    si[ib] = s1;
                }
                accumulate_row(
                    &mut row2,
                    1.0,
                    None,
                    &i.vectors()[ii],
                    i.vectors(),
                    &si,
                    &j.vectors()[jj],
                    &eff.c,
                    s1_tot,
                    s2_tot,
                );
            }
        }
    }
    let n2 = (ni * nj) as f64;
    second /= n2;

    let value = (nx as f64).ln() - first + second;
    let row = with_grad.then(|| {
        row.iter()
            .zip(&row2)
            .map(|(a, b)| a / n1 + b / n2)
            .collect()
    });
    Ok((value, row))
}

/// Adds `sign · Σ (s1 conj(v) + s2 c̃)` for one outer term into `row`.
///
/// `v` is `[x - x̄; i - ī; j]` (or `[0; i - ī; j]` when `x_part` is `None`),
/// and the per-index sums of `s1` let the differences be expanded.
#[allow(clippy::too_many_arguments)]
fn accumulate_row(
    row: &mut [C64],
    sign: f64,
    x_part: Option<(C64, &[C64], &[C64])>,
    i_vec: &[C64],
    i_all: &[Vec<C64>],
    si: &[C64],
    j_vec: &[C64],
    c_coef: &[C64],
    s1_tot: C64,
    s2_tot: f64,
) {
    if let Some((x_conj, points_conj, sx)) = x_part {
        let cross: C64 = sx.iter().zip(points_conj).map(|(s, p)| s * p).sum();
        row[0] += (x_conj * s1_tot - cross) * sign;
    }
    let di = i_vec.len();
    for t in 0..di {
        let cross: C64 = si.iter().zip(i_all).map(|(s, v)| s * v[t].conj()).sum();
        row[1 + t] += (i_vec[t].conj() * s1_tot - cross) * sign;
    }
    for (t, (jv, c)) in j_vec.iter().zip(c_coef).enumerate() {
        row[1 + di + t] += (jv.conj() * s1_tot + c * s2_tot) * sign;
    }
}
