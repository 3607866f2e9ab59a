//! Separable two-dimensional blur built from Toeplitz factors.
//!
//! Columns of the image are blurred by a symmetric banded Toeplitz
//! matrix `A_c` and rows by a nonsymmetric one `A_r`, so the operator on
//! column-major vectorized images is the Kronecker product `A_r (x) A_c`
//! and its action is computed as `vec(A_c X A_r')` without ever forming
//! the `d x d` matrix.
//!
//! The factors are generated MATLAB-toeplitz style from a column
//! generator `c = [5 4 3 2 1] / 15` (both factors) and, for `A_r`, a row
//! generator `r = [5.0 4.5 ... 0.5] / 15`, matching `c[0] = r[0]`.

use ndarray::{Array2, ShapeBuilder};

use super::LinearOperator;
use crate::{Error, Result};

/// Column-blur generator; also the column generator of the row blur.
const GEN_C: [f64; 5] = [5.0 / 15.0, 4.0 / 15.0, 3.0 / 15.0, 2.0 / 15.0, 1.0 / 15.0];

/// Number of row-generator entries `5.0, 4.5, ..., 0.5` over 15.
const GEN_R_LEN: usize = 10;

fn gen_r(i: usize) -> f64 {
    (5.0 - 0.5 * i as f64) / 15.0
}

/// Blur acting as `x -> vec(A_c X A_r')` on `N x N` images.
#[derive(Debug, Clone)]
pub struct SeparableBlurModel2D {
    n: usize,
    a_c: Array2<f64>,
    a_r: Array2<f64>,
}

impl SeparableBlurModel2D {
    pub fn new(n: usize) -> Result<Self> {
        if n < GEN_R_LEN {
            return Err(Error::dim("blur image side", GEN_R_LEN, n));
        }
        let mut a_c = Array2::zeros((n, n));
        let mut a_r = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i >= j {
                    let lag = i - j;
                    if lag < GEN_C.len() {
                        a_c[[i, j]] = GEN_C[lag];
                        a_r[[i, j]] = GEN_C[lag];
                    }
                } else {
                    let lag = j - i;
                    if lag < GEN_C.len() {
                        a_c[[i, j]] = GEN_C[lag];
                    }
                    if lag < GEN_R_LEN {
                        a_r[[i, j]] = gen_r(lag);
                    }
                }
            }
        }
        Ok(SeparableBlurModel2D { n, a_c, a_r })
    }

    pub fn image_side(&self) -> usize {
        self.n
    }

    pub fn column_factor(&self) -> &Array2<f64> {
        &self.a_c
    }

    pub fn row_factor(&self) -> &Array2<f64> {
        &self.a_r
    }

    /// Reshapes a column-major vector into its `N x N` image.
    fn image_of(&self, x: &[f64]) -> Array2<f64> {
        Array2::from_shape_vec((self.n, self.n).f(), x.to_vec()).expect("length checked by caller")
    }

    fn store(&self, img: &Array2<f64>, out: &mut [f64]) {
        for c in 0..self.n {
            for r in 0..self.n {
                out[c * self.n + r] = img[[r, c]];
            }
        }
    }
}

impl LinearOperator for SeparableBlurModel2D {
    fn nrows(&self) -> usize {
        self.n * self.n
    }

    fn ncols(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n * self.n);
        assert_eq!(y.len(), self.n * self.n);
        let img = self.image_of(x);
        let blurred = self.a_c.dot(&img).dot(&self.a_r.t());
        self.store(&blurred, y);
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.n * self.n);
        assert_eq!(x.len(), self.n * self.n);
        let img = self.image_of(y);
        let back = self.a_c.t().dot(&img).dot(&self.a_r);
        self.store(&back, x);
    }

    /// Explicit Kronecker product `A_r (x) A_c`; 8 MB at `N = 32`.
    fn to_dense(&self) -> Array2<f64> {
        kron(&self.a_r, &self.a_c)
    }

    /// `A' A = (A_r' A_r) (x) (A_c' A_c)`, assembled from the two small
    /// Gram factors instead of the full matrix.
    fn gram_dense(&self) -> Array2<f64> {
        let gc = crate::lapack::gram(self.a_c.view());
        let gr = crate::lapack::gram(self.a_r.view());
        kron(&gr, &gc)
    }
}

/// Dense Kronecker product `a (x) b`.
pub(crate) fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == 0.0 {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[[i * br + p, j * bc + q]] = aij * b[[p, q]];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_too_small_images() {
        assert!(SeparableBlurModel2D::new(9).is_err());
        assert!(SeparableBlurModel2D::new(10).is_ok());
    }

    #[test]
    fn factors_have_toeplitz_structure() {
        let op = SeparableBlurModel2D::new(12).unwrap();
        let (a_c, a_r) = (op.column_factor(), op.row_factor());
        // Column factor is symmetric with bandwidth 4.
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(a_c[[i, j]], a_c[[j, i]]);
                if i.abs_diff(j) > 4 {
                    assert_eq!(a_c[[i, j]], 0.0);
                }
            }
        }
        assert_abs_diff_eq!(a_c[[3, 3]], 5.0 / 15.0);
        assert_abs_diff_eq!(a_c[[3, 1]], 3.0 / 15.0);
        // Row factor: lower band from c, wider upper band from r.
        assert_abs_diff_eq!(a_r[[5, 3]], 3.0 / 15.0);
        assert_abs_diff_eq!(a_r[[3, 5]], 4.0 / 15.0);
        assert_abs_diff_eq!(a_r[[0, 9]], 0.5 / 15.0);
        assert_eq!(a_r[[0, 10]], 0.0);
        assert_eq!(a_r[[6, 0]], 0.0);
    }

    #[test]
    fn apply_matches_explicit_kronecker_product() {
        let n = 10;
        let op = SeparableBlurModel2D::new(n).unwrap();
        let dense = op.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; n * n];
        op.apply(&x, &mut y);
        for i in 0..n * n {
            let expect: f64 = (0..n * n).map(|j| dense[[i, j]] * x[j]).sum();
            assert_abs_diff_eq!(y[i], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn adjoint_is_consistent() {
        let n = 11;
        let op = SeparableBlurModel2D::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let u: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut au = vec![0.0; n * n];
            op.apply(&u, &mut au);
            let mut atv = vec![0.0; n * n];
            op.apply_adjoint(&v, &mut atv);
            let lhs: f64 = au.iter().zip(&v).map(|(a, b)| a * b).sum();
            let rhs: f64 = u.iter().zip(&atv).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn gram_shortcut_matches_dense_gram() {
        let op = SeparableBlurModel2D::new(10).unwrap();
        let fast = op.gram_dense();
        let dense = op.to_dense();
        let slow = dense.t().dot(&dense);
        for i in 0..100 {
            for j in 0..100 {
                assert_abs_diff_eq!(fast[[i, j]], slow[[i, j]], epsilon = 1e-12);
            }
        }
    }
}
