//! First-order difference operators with a zero boundary.
//!
//! In 1D the operator is the `N x N` lower-bidiagonal matrix `D` with
//! `+1` on the diagonal and `-1` on the subdiagonal, so `(D x)_0 = x_0`
//! encodes the zero boundary on the left. In 2D the operator stacks the
//! within-column differences `I_N (x) D` on top of the across-column
//! differences `D (x) I_N`, giving `k = 2 d` increment rows for column
//! major vectorized `N x N` images.

use ndarray::Array2;

use super::LinearOperator;
use crate::{Error, Result};

/// Grid dimensionality of the difference operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimensionality {
    One,
    Two,
}

/// Matrix-free first-order difference (structure) operator.
#[derive(Debug, Clone)]
pub struct DifferenceOperator {
    dim: Dimensionality,
    n: usize,
    d: usize,
    k: usize,
}

impl DifferenceOperator {
    pub fn new(dim: Dimensionality, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::dim("difference operator grid", 2, n));
        }
        let d = match dim {
            Dimensionality::One => n,
            Dimensionality::Two => n * n,
        };
        let k = match dim {
            Dimensionality::One => d,
            Dimensionality::Two => 2 * d,
        };
        Ok(DifferenceOperator { dim, n, d, k })
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.dim
    }

    /// Grid side length `N`.
    pub fn grid(&self) -> usize {
        self.n
    }

    /// Number of unknowns `d`.
    pub fn unknowns(&self) -> usize {
        self.d
    }

    /// Number of increments `k` (rows of the operator).
    pub fn increments(&self) -> usize {
        self.k
    }

    /// The two potential nonzeros of row `i`: the `+1` column and, away
    /// from the zero boundary, the `-1` column.
    pub fn row(&self, i: usize) -> (usize, Option<usize>) {
        debug_assert!(i < self.k);
        let n = self.n;
        match self.dim {
            Dimensionality::One => (i, i.checked_sub(1)),
            Dimensionality::Two => {
                if i < self.d {
                    // Within-column block: difference along rows.
                    let r = i % n;
                    (i, if r > 0 { Some(i - 1) } else { None })
                } else {
                    // Across-column block: difference along columns.
                    let j = i - self.d;
                    let c = j / n;
                    (j, if c > 0 { Some(j - n) } else { None })
                }
            }
        }
    }

    /// Dense `W^{1/2} L` with per-row scales `s_i` (the rows of `L`
    /// multiplied by `s_i`); input is the scale, not the variance. Used
    /// to assemble the matrix handed to the QR factorization in 2D.
    pub fn scaled_dense(&self, scales: &[f64]) -> Array2<f64> {
        assert_eq!(scales.len(), self.k);
        let mut out = Array2::zeros((self.k, self.d));
        for i in 0..self.k {
            let (pos, neg) = self.row(i);
            out[[i, pos]] = scales[i];
            if let Some(neg) = neg {
                out[[i, neg]] = -scales[i];
            }
        }
        out
    }

    /// Adds `L' diag(weights) L` into `target` (dense, `d x d`). The
    /// direct sampler calls this once per Gibbs iteration to build the
    /// posterior precision on top of the data term.
    pub fn add_weighted_gram(&self, weights: &[f64], target: &mut Array2<f64>) {
        assert_eq!(weights.len(), self.k);
        assert_eq!(target.nrows(), self.d);
        assert_eq!(target.ncols(), self.d);
        for i in 0..self.k {
            let w = weights[i];
            let (pos, neg) = self.row(i);
            target[[pos, pos]] += w;
            if let Some(neg) = neg {
                target[[neg, neg]] += w;
                target[[pos, neg]] -= w;
                target[[neg, pos]] -= w;
            }
        }
    }
}

impl LinearOperator for DifferenceOperator {
    fn nrows(&self) -> usize {
        self.k
    }

    fn ncols(&self) -> usize {
        self.d
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.d);
        assert_eq!(y.len(), self.k);
        let n = self.n;
        match self.dim {
            Dimensionality::One => {
                y[0] = x[0];
                for i in 1..n {
                    y[i] = x[i] - x[i - 1];
                }
            }
            Dimensionality::Two => {
                let d = self.d;
                for c in 0..n {
                    let base = c * n;
                    y[base] = x[base];
                    for r in 1..n {
                        y[base + r] = x[base + r] - x[base + r - 1];
                    }
                }
                for c in 0..n {
                    let base = c * n;
                    for r in 0..n {
                        let j = base + r;
                        y[d + j] = if c > 0 { x[j] - x[j - n] } else { x[j] };
                    }
                }
            }
        }
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.k);
        assert_eq!(x.len(), self.d);
        x.fill(0.0);
        for i in 0..self.k {
            let (pos, neg) = self.row(i);
            x[pos] += y[i];
            if let Some(neg) = neg {
                x[neg] -= y[i];
            }
        }
    }
}
