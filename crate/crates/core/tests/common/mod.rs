//! Independent reference implementations and random instance generators
//! shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use rsma::alphabet::{make_constellation, modes_for_complexity, ConstellationKind, TransmissionMode};
use rsma::channel::ChannelRealization;
use rsma::optimize::Precoder;
use rsma::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn cn(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn cn_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| cn(rng))
}

pub fn channels(rng: &mut ChaCha8Rng, n_t: usize, users: usize) -> ChannelRealization {
    let h = (0..users).map(|_| DVector::from_fn(n_t, |_, _| cn(rng))).collect();
    ChannelRealization::new(h, 0).unwrap()
}

/// Random precoder using `fraction` of the budget `p_t`.
pub fn precoder(rng: &mut ChaCha8Rng, n_t: usize, users: usize, p_t: f64, fraction: f64) -> Precoder {
    let m = cn_matrix(rng, n_t, users + 1);
    let scale = (fraction * p_t / m.norm_squared()).sqrt();
    Precoder::new(m * C64::new(scale, 0.0), p_t).unwrap()
}

pub fn random_mode(rng: &mut ChaCha8Rng) -> TransmissionMode {
    let delta = [2usize, 4, 8, 16][rng.random_range(0..4)];
    let modes = modes_for_complexity(delta).unwrap();
    modes[rng.random_range(0..modes.len())]
}

pub fn random_kind(rng: &mut ChaCha8Rng, allow_null: bool) -> ConstellationKind {
    let all = ConstellationKind::ALL;
    loop {
        let k = all[rng.random_range(0..all.len())];
        if allow_null || k != ConstellationKind::Null {
            return k;
        }
    }
}

/// Directional derivative `2 Re tr(E^H G)` of the conjugate-Wirtinger layout.
pub fn directional(e: &DMatrix<C64>, g: &DMatrix<C64>) -> f64 {
    2.0 * e.iter().zip(g.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
}

/// Central finite difference of `f` along `e`.
pub fn central_difference(f: impl Fn(&DMatrix<C64>) -> f64, p: &DMatrix<C64>, e: &DMatrix<C64>, step: f64) -> f64 {
    let t = C64::new(step, 0.0);
    (f(&(p + e * t)) - f(&(p - e * t))) / (2.0 * step)
}

fn log_mean_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + (v.iter().map(|x| (x - m).exp()).sum::<f64>() / v.len() as f64).ln()
}

/// Mean and standard error of a sample.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte-Carlo mutual information `I(x; y)` in bits for
/// `y = a x + Σ b_t i_t + z`, with `x` and each `i_t` uniform over their
/// constellations and `z ~ CN(0, sigma2)`. Returns `(estimate, std error)`.
pub fn brute_force_mi(
    x: ConstellationKind,
    interferers: &[ConstellationKind],
    a: C64,
    b: &[C64],
    sigma2: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let xs = make_constellation(x).points().to_vec();
    // every interference superposition, enumerated by mixed-radix counting
    let comps: Vec<Vec<C64>> = interferers.iter().map(|k| make_constellation(*k).points().to_vec()).collect();
    let mut offsets = vec![C64::new(0.0, 0.0)];
    for (comp, coef) in comps.iter().zip(b) {
        offsets = offsets
            .iter()
            .flat_map(|o| comp.iter().map(move |p| o + coef * p))
            .collect();
    }
    let mut r = rng(seed);
    let mut vals = Vec::with_capacity(samples);
    let mut cond = vec![0.0; offsets.len()];
    let mut marg = vec![0.0; offsets.len() * xs.len()];
    for _ in 0..samples {
        let xv = xs[r.random_range(0..xs.len())];
        let iv = offsets[r.random_range(0..offsets.len())];
        let y = a * xv + iv + cn(&mut r) * sigma2.sqrt();
        for (k, o) in offsets.iter().enumerate() {
            cond[k] = -(y - a * xv - o).norm_sqr() / sigma2;
        }
        for (n, xb) in xs.iter().enumerate() {
            for (k, o) in offsets.iter().enumerate() {
                marg[n * offsets.len() + k] = -(y - a * xb - o).norm_sqr() / sigma2;
            }
        }
        vals.push((log_mean_exp(&cond) - log_mean_exp(&marg)) / std::f64::consts::LN_2);
    }
    mean_se(&vals)
}

/// Max-min common allocation value by bisection on the level `t`: `t` is
/// reachable iff `Σ_k max(0, (t - I_p,k) / I_c,k) ≤ 1`.
pub fn maxmin_level(i_c: &[f64], i_p: &[f64]) -> f64 {
    let need = |t: f64| -> f64 {
        i_c.iter().zip(i_p).map(|(c, p)| ((t - p) / c).max(0.0)).sum()
    };
    let mut lo = i_p.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = i_p.iter().zip(i_c).map(|(p, c)| p + c).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if need(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Best `min_k(c_k I_c,k + I_p,k)` over the simplex grid of step `1/n`
/// for three users.
pub fn maxmin_grid3(i_c: &[f64], i_p: &[f64], n: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in 0..=n {
        for b in 0..=(n - a) {
            let c = [a as f64 / n as f64, b as f64 / n as f64, (n - a - b) as f64 / n as f64];
            let v = (0..3).map(|k| c[k] * i_c[k] + i_p[k]).fold(f64::INFINITY, f64::min);
            best = best.max(v);
        }
    }
    best
}

/// Covariance entry `(m, n)` by composite Simpson integration with `points`
/// (even) subintervals.
pub fn covariance_entry(printed: bool, theta: f64, delta: f64, lag: f64, points: usize) -> C64 {
    let h = 2.0 * delta / points as f64;
    let f = |alpha: f64| {
        let phase = if printed {
            -PI * (alpha + theta) * lag * alpha.sin()
        } else {
            -PI * lag * (alpha + theta).sin()
        };
        C64::from_polar(1.0, phase)
    };
    let mut acc = f(-delta) + f(delta);
    for k in 1..points {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(-delta + k as f64 * h) * w;
    }
    acc * (h / 3.0) / (2.0 * delta)
}
