//! Forward operators and the first-order difference (structure) operator.
//!
//! Everything the sampler touches goes through [`LinearOperator`], so the
//! Gibbs steps are identical for the dense deconvolution matrix, the
//! Kronecker-structured blur and the sparse ray projector. Operators are
//! immutable after construction and their products are pure functions.
//!
//! 2D images are vectorized column-major: pixel `(r, c)` of an `N x N`
//! image lives at index `c * N + r`. This is stated once here and relied
//! on everywhere (difference blocks, blur Kronecker form, projector
//! pixel indexing, artifact export).

mod blur;
mod convolution;
mod difference;
mod fanbeam;

pub use blur::SeparableBlurModel2D;
pub use convolution::ConvolutionModel1D;
pub use difference::{DifferenceOperator, Dimensionality};
pub use fanbeam::FanBeamProjector;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest unknown dimension for which operators may be densified; keeps
/// explicit factorizations feasible on one core.
pub const MAX_DENSE_DIM: usize = 4096;

/// A real matrix exposed through its action on vectors.
pub trait LinearOperator {
    /// Output dimension `m`.
    fn nrows(&self) -> usize;

    /// Input dimension `d`.
    fn ncols(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `x = A' y`.
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]);

    /// Explicit matrix, assembled column by column. Implementations with
    /// native storage override this; the cap keeps memory bounded.
    fn to_dense(&self) -> Array2<f64> {
        let (m, d) = (self.nrows(), self.ncols());
        assert!(
            d <= MAX_DENSE_DIM,
            "refusing to densify a {m} x {d} operator"
        );
        let mut a = Array2::zeros((m, d));
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; m];
        for j in 0..d {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..m {
                a[[i, j]] = col[i];
            }
        }
        a
    }

    /// Dense Gram matrix `A' A`, precomputed once per chain by the direct
    /// sampler. Structured operators override this with cheaper routes.
    fn gram_dense(&self) -> Array2<f64> {
        crate::lapack::gram(self.to_dense().view())
    }
}

/// An explicitly stored matrix; used for small problems and as the
/// reference implementation in tests.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    a: Array2<f64>,
}

impl DenseOperator {
    pub fn new(a: Array2<f64>) -> Self {
        DenseOperator { a }
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.a.view()
    }
}

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.a.nrows()
    }

    fn ncols(&self) -> usize {
        self.a.ncols()
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

/// `y = A x` for a row-major dense matrix.
pub(crate) fn dense_apply(a: ArrayView2<'_, f64>, x: &[f64], y: &mut [f64]) {
    let (m, d) = (a.nrows(), a.ncols());
    assert_eq!(x.len(), d);
    assert_eq!(y.len(), m);
    let s = a.as_slice().expect("contiguous row-major matrix");
    for i in 0..m {
        let row = &s[i * d..(i + 1) * d];
        y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// `x = A' y` for a row-major dense matrix, accumulated row by row so the
/// memory access stays contiguous.
pub(crate) fn dense_apply_adjoint(a: ArrayView2<'_, f64>, y: &[f64], x: &mut [f64]) {
    let (m, d) = (a.nrows(), a.ncols());
    assert_eq!(y.len(), m);
    assert_eq!(x.len(), d);
    let s = a.as_slice().expect("contiguous row-major matrix");
    x.fill(0.0);
    for i in 0..m {
        let row = &s[i * d..(i + 1) * d];
        let yi = y[i];
        for (xj, aij) in x.iter_mut().zip(row) {
            *xj += aij * yi;
        }
    }
}

/// Generates observations `y = A x_true + e` with i.i.d. Gaussian noise.
///
/// The noise standard deviation follows the relative rule
/// `sigma = level * ||A x_true||_2 / sqrt(m)`, shared by all three
/// experiment families (the 1D/2D percentages and the tomography rule
/// coincide under this convention). Returns the data and the realized
/// `sigma` for reporting; the sampler itself never sees the true value.
pub fn forward_data<O, R>(op: &O, x_true: &[f64], noise_level: f64, rng: &mut R) -> (Vec<f64>, f64)
where
    O: LinearOperator + ?Sized,
    R: Rng + ?Sized,
{
    let m = op.nrows();
    let mut y = vec![0.0; m];
    op.apply(x_true, &mut y);
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sigma = noise_level * norm / (m as f64).sqrt();
    for yi in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *yi += sigma * e;
    }
    (y, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_apply_matches_ndarray() {
        let a = arr2(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let op = DenseOperator::new(a.clone());
        let x = [1.0, -1.0, 2.0];
        let mut y = [0.0; 2];
        op.apply(&x, &mut y);
        assert_eq!(y, [5.0, 11.0]);
        let mut back = [0.0; 3];
        op.apply_adjoint(&y, &mut back);
        let expect = a.t().dot(&ndarray::arr1(&y));
        for j in 0..3 {
            assert_abs_diff_eq!(back[j], expect[j], epsilon = 1e-14);
        }
    }

    #[test]
    fn default_densify_reconstructs_matrix() {
        struct Twice;
        impl LinearOperator for Twice {
            fn nrows(&self) -> usize {
                2
            }
            fn ncols(&self) -> usize {
                2
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                y[0] = 2.0 * x[0];
                y[1] = 2.0 * x[1];
            }
            fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
                self.apply(y, x);
            }
        }
        let dense = Twice.to_dense();
        assert_eq!(dense, arr2(&[[2.0, 0.0], [0.0, 2.0]]));
        let g = Twice.gram_dense();
        assert_eq!(g, arr2(&[[4.0, 0.0], [0.0, 4.0]]));
    }

    #[test]
    fn forward_data_noise_scale() {
        let op = DenseOperator::new(Array2::eye(4));
        let x = [1.0, 1.0, 1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (y, sigma) = forward_data(&op, &x, 0.02, &mut rng);
        // ||A x|| = 2, m = 4, so sigma = 0.02 * 2 / 2.
        assert_abs_diff_eq!(sigma, 0.02, epsilon = 1e-15);
        assert_eq!(y.len(), 4);
        for (yi, xi) in y.iter().zip(&x) {
            assert!((yi - xi).abs() < 6.0 * sigma);
        }
    }

    #[test]
    fn forward_data_zero_level_is_exact() {
        let op = DenseOperator::new(arr2(&[[1.0, 2.0], [3.0, 4.0]]));
        let x = [1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (y, sigma) = forward_data(&op, &x, 0.0, &mut rng);
        assert_eq!(sigma, 0.0);
        assert_eq!(y, vec![3.0, 7.0]);
    }
}
