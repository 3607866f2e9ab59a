//! Dense one-dimensional Gaussian convolution on the unit interval.
//!
//! The signal lives on `d` midpoints `t_i = (i + 0.5) / d` of `[0, 1]`
//! and the data are the convolution with a unit-mass Gaussian kernel of
//! width `s`, discretized by the midpoint rule:
//!
//! ```text
//! A[i][j] = (1 / (d s sqrt(2 pi))) exp(-(t_i - u_j)^2 / (2 s^2))
//! ```
//!
//! Kernel mass is one, so interior rows sum approximately to one and the
//! data level matches the signal level; rows near the boundary lose the
//! truncated tail mass. The matrix is symmetric up to that truncation.

use ndarray::Array2;

use super::{dense_apply, dense_apply_adjoint, LinearOperator};
use crate::{Error, Result};

/// Dense discrete convolution operator (`m = d`).
#[derive(Debug, Clone)]
pub struct ConvolutionModel1D {
    d: usize,
    s: f64,
    a: Array2<f64>,
}

impl ConvolutionModel1D {
    pub fn new(d: usize, s: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::dim("convolution grid", 2, d));
        }
        if !(s > 0.0) {
            return Err(Error::invalid(format!("kernel width must be positive, got {s}")));
        }
        let h = 1.0 / d as f64;
        let norm = h / (s * (2.0 * std::f64::consts::PI).sqrt());
        let mut a = Array2::zeros((d, d));
        for i in 0..d {
            let t = (i as f64 + 0.5) * h;
            for j in 0..d {
                let u = (j as f64 + 0.5) * h;
                let z = (t - u) / s;
                a[[i, j]] = norm * (-0.5 * z * z).exp();
            }
        }
        Ok(ConvolutionModel1D { d, s, a })
    }

    pub fn kernel_width(&self) -> f64 {
        self.s
    }
}

impl LinearOperator for ConvolutionModel1D {
    fn nrows(&self) -> usize {
        self.d
    }

    fn ncols(&self) -> usize {
        self.d
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        dense_apply(self.a.view(), x, y);
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        dense_apply_adjoint(self.a.view(), y, x);
    }

    fn to_dense(&self) -> Array2<f64> {
        self.a.clone()
    }

    fn gram_dense(&self) -> Array2<f64> {
        crate::lapack::gram(self.a.view())
    }
}
