//! Conjugate gradients for least squares (CGLS).
//!
//! Solves `min ||M x - z||_2` by running conjugate gradients on the
//! normal equations `M' M x = M' z` implicitly: only products with `M`
//! and `M'` are formed, never the normal matrix itself. One iteration
//! costs exactly one product with `M` and one with `M'`.

use crate::operators::LinearOperator;

/// Outcome of a CGLS solve.
#[derive(Debug, Clone)]
pub struct CglsResult {
    pub x: Vec<f64>,
    /// Final residual `z - M x`; callers reuse it to recover `M x`
    /// without another operator product.
    pub residual: Vec<f64>,
    /// Iterations actually performed.
    pub iterations: usize,
    /// Whether the relative normal-equations residual dropped below the
    /// tolerance before the iteration cap.
    pub converged: bool,
}

/// Runs CGLS from `x0`, or from the zero vector if no start is given.
///
/// Stops once `||M'(z - M x)|| / ||M' r_0|| < tol` (the ratio is
/// available for free as `sqrt(gamma_j / gamma_0)`) or after `max_iter`
/// steps. With a warm start the normalizer is the initial residual, so
/// the tolerance measures progress relative to how far the start was
/// from the solution.
pub fn cgls<M>(m: &M, z: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> CglsResult
where
    M: LinearOperator + ?Sized,
{
    let (rows, cols) = (m.nrows(), m.ncols());
    assert_eq!(z.len(), rows);
    let mut x = match x0 {
        Some(start) => {
            assert_eq!(start.len(), cols);
            start.to_vec()
        }
        None => vec![0.0; cols],
    };
    let mut r = z.to_vec();
    let mut s = vec![0.0; cols];
    let mut gamma_floor = 0.0;
    if x0.is_some() {
        let mut mx = vec![0.0; rows];
        m.apply(&x, &mut mx);
        for (ri, mi) in r.iter_mut().zip(&mx) {
            *ri -= mi;
        }
        // A start that already satisfies the normal equations to working
        // precision (relative to the cold-start scale ||M' z||) counts
        // as converged; iterating would only chase rounding noise.
        m.apply_adjoint(z, &mut s);
        let gamma_z: f64 = s.iter().map(|v| v * v).sum();
        let tiny = 16.0 * f64::EPSILON;
        gamma_floor = tiny * tiny * gamma_z;
    }
    m.apply_adjoint(&r, &mut s);
    let gamma0: f64 = s.iter().map(|v| v * v).sum();
    if gamma0 <= gamma_floor {
        return CglsResult { x, residual: r, iterations: 0, converged: true };
    }
    let mut gamma = gamma0;
    let mut p = s.clone();
    let mut q = vec![0.0; rows];
    for iter in 1..=max_iter {
        m.apply(&p, &mut q);
        let qq: f64 = q.iter().map(|v| v * v).sum();
        if qq == 0.0 {
            // Search direction in the null space; nothing left to gain.
            return CglsResult { x, residual: r, iterations: iter, converged: false };
        }
        let alpha = gamma / qq;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        m.apply_adjoint(&r, &mut s);
        let gamma_new: f64 = s.iter().map(|v| v * v).sum();
        if (gamma_new / gamma0).sqrt() < tol {
            return CglsResult { x, residual: r, iterations: iter, converged: true };
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    CglsResult { x, residual: r, iterations: max_iter, converged: false }
}
