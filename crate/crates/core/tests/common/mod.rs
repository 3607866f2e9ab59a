//! Shared oracle helpers for the integration and acceptance suites.
//! Everything here recomputes quantities through independent routes
//! (statrs densities, quadrature, brute-force statistics) rather than
//! through the code under test.

#![allow(dead_code)]

use ndarray::Array2;
use statrs::distribution::{Continuous, ContinuousCDF, InverseGamma};

/// Kullback-Leibler divergence between a brute-force conditional given
/// as an unnormalized log density and the closed-form inverse-gamma law
/// with the given shape and scale (rate). The density is gridded in
/// log space over all but 2e-10 of the closed form's mass and
/// normalized by trapezoid quadrature, so agreement at the level of
/// quadrature error (far below 1e-6) certifies conjugacy.
pub fn gridded_kl_vs_inverse_gamma<F: Fn(f64) -> f64>(
    shape: f64,
    scale: f64,
    log_unnorm: F,
) -> f64 {
    let closed = InverseGamma::new(shape, scale).unwrap();
    let lo = closed.inverse_cdf(1e-10).ln();
    let hi = closed.inverse_cdf(1.0 - 1e-10).ln();
    let n = 20_000usize;
    let h = (hi - lo) / (n - 1) as f64;
    // Work in u = ln t; densities pick up the Jacobian t and KL is
    // invariant under the change of variables.
    let us: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    let logs: Vec<f64> = us.iter().map(|&u| log_unnorm(u.exp()) + u).collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let f: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let z: f64 = f.iter().enumerate().map(|(i, v)| v * weight(i)).sum();
    let mut kl = 0.0;
    for i in 0..n {
        let p = f[i] / z;
        let t = us[i].exp();
        let q = closed.pdf(t) * t;
        if p > 0.0 && q > 0.0 {
            kl += weight(i) * p * (p / q).ln();
        }
    }
    kl
}

/// Two-sided Kolmogorov-Smirnov statistic of draws against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(draws: &[f64], cdf: F) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let c = cdf(*x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max((c - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// CDF of the half-Cauchy distribution with scale `c`.
pub fn half_cauchy_cdf(x: f64, c: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        std::f64::consts::FRAC_2_PI * (x / c).atan()
    }
}

/// Sample mean vector and covariance matrix (denominator `n - 1`) of a
/// set of equal-length draws.
pub fn mean_and_cov(draws: &[Vec<f64>]) -> (Vec<f64>, Array2<f64>) {
    let n = draws.len();
    let d = draws[0].len();
    let mut mean = vec![0.0; d];
    for s in draws {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut cov = Array2::<f64>::zeros((d, d));
    for s in draws {
        for i in 0..d {
            let di = s[i] - mean[i];
            for j in 0..d {
                cov[[i, j]] += di * (s[j] - mean[j]);
            }
        }
    }
    cov /= (n - 1) as f64;
    (mean, cov)
}

/// Relative Frobenius distance `||a - b||_F / ||b||_F`.
pub fn frobenius_rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let num: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den
}

/// Dense inverse of a symmetric positive definite matrix through the
/// crate's own Cholesky plus triangular solves on unit vectors.
pub fn spd_inverse(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut g = a.clone();
    horseshoe_core::lapack::cholesky_lower_inplace(&mut g).unwrap();
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        horseshoe_core::lapack::solve_lower(&g, &mut e);
        horseshoe_core::lapack::solve_lower_transpose(&g, &mut e);
        for i in 0..n {
            inv[[i, j]] = e[i];
        }
    }
    inv
}

/// Indices of the `k` largest entries of `values`.
pub fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    idx.truncate(k);
    idx
}
