//! Generalized mutual information of a finite-alphabet stream observed under
//! finite-alphabet interference and Gaussian noise.
//!
//! The receiver treats the interferers in `I` optimally and the interferers
//! in `J` as Gaussian noise of matching variance. All internal quantities are
//! in nats; public rate values are converted to bits where noted.

mod approx;
mod exact;

pub use approx::{approx_value_and_row, gmi_approx, gmi_approx_grad, gmi_approx_nats};
pub use exact::{gmi_exact, gmi_exact_at, ExactSettings, ExponentGrouping, GmiEstimate, MIN_MC_SAMPLES};

use nalgebra::{DMatrix, DVector};

use crate::alphabet::{Alphabet, VectorAlphabet};
use crate::{Error, Result, C64};

/// Received-signal coefficients of one decoding role:
/// `y = a x + B i + C j + z` with `z ~ CN(0, sigma2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub a: C64,
    pub b: Vec<C64>,
    pub c: Vec<C64>,
    pub sigma2: f64,
}

impl EffectiveChannel {
    pub fn new(a: C64, b: Vec<C64>, c: Vec<C64>, sigma2: f64) -> Self {
        EffectiveChannel { a, b, c, sigma2 }
    }

    /// `h^H P̃` split into its blocks.
    pub fn from_stacked(h: &DVector<C64>, sp: &StackedPrecoder, sigma2: f64) -> Result<Self> {
        if h.len() != sp.p_tilde.nrows() {
            return Err(Error::Dimension(format!(
                "channel length {} vs precoder rows {}",
                h.len(),
                sp.p_tilde.nrows()
            )));
        }
        let row = h.adjoint() * &sp.p_tilde;
        Ok(EffectiveChannel {
            a: row[0],
            b: (0..sp.dim_i).map(|t| row[1 + t]).collect(),
            c: (0..sp.dim_j).map(|t| row[1 + sp.dim_i + t]).collect(),
            sigma2,
        })
    }

    /// Power of the Gaussian-treated interference, `‖C‖²`.
    pub fn gaussian_power(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn check(&self, x: &Alphabet, i: &VectorAlphabet, j: &VectorAlphabet) -> Result<()> {
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::NonPositiveNoise(self.sigma2));
        }
        if x.order() == 0 || i.is_empty() || j.is_empty() {
            return Err(Error::Dimension("empty alphabet".into()));
        }
        if self.b.len() != i.dims() || self.c.len() != j.dims() {
            return Err(Error::Dimension(format!(
                "coefficients ({}, {}) vs alphabet dims ({}, {})",
                self.b.len(),
                self.c.len(),
                i.dims(),
                j.dims()
            )));
        }
        Ok(())
    }

    /// Received constellation offsets per alphabet element.
    pub(crate) fn projections(
        &self,
        x: &Alphabet,
        i: &VectorAlphabet,
        j: &VectorAlphabet,
    ) -> Projections {
        let dot = |coef: &[C64], v: &[C64]| coef.iter().zip(v).map(|(c, s)| c * s).sum::<C64>();
        Projections {
            ax: x.points().iter().map(|&p| self.a * p).collect(),
            bi: i.vectors().iter().map(|v| dot(&self.b, v)).collect(),
            cj: j.vectors().iter().map(|v| dot(&self.c, v)).collect(),
        }
    }
}

pub(crate) struct Projections {
    pub ax: Vec<C64>,
    pub bi: Vec<C64>,
    pub cj: Vec<C64>,
}

/// Column-permuted precoder `[p_x | P_i | P_j]` of one decoding role.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedPrecoder {
    pub p_tilde: DMatrix<C64>,
    /// Global precoder column of each stacked column.
    pub column_map: Vec<usize>,
    pub dim_i: usize,
    pub dim_j: usize,
}

impl StackedPrecoder {
    /// Gathers columns of `p`: `x_col` first, then `i_cols`, then `j_cols`.
    pub fn gather(p: &DMatrix<C64>, x_col: usize, i_cols: &[usize], j_cols: &[usize]) -> Result<Self> {
        let column_map: Vec<usize> = std::iter::once(x_col)
            .chain(i_cols.iter().copied())
            .chain(j_cols.iter().copied())
            .collect();
        let mut seen = vec![false; p.ncols()];
        for &c in &column_map {
            if c >= p.ncols() || seen[c] {
                return Err(Error::Dimension(format!(
                    "column map {column_map:?} is not injective into {} columns",
                    p.ncols()
                )));
            }
            seen[c] = true;
        }
        let cols: Vec<_> = column_map.iter().map(|&c| p.column(c).into_owned()).collect();
        Ok(StackedPrecoder {
            p_tilde: DMatrix::from_columns(&cols),
            column_map,
            dim_i: i_cols.len(),
            dim_j: j_cols.len(),
        })
    }

    pub fn width(&self) -> usize {
        1 + self.dim_i + self.dim_j
    }

    /// Adds a stacked-order gradient into a matrix laid out like the global
    /// precoder.
    pub fn scatter_add(&self, stacked: &DMatrix<C64>, global: &mut DMatrix<C64>, weight: f64) {
        for (t, &col) in self.column_map.iter().enumerate() {
            let mut dst = global.column_mut(col);
            dst.axpy(C64::new(weight, 0.0), &stacked.column(t), C64::new(1.0, 0.0));
        }
    }
}

/// Numerically stable `log Σ exp(v)`.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
