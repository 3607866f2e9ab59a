//! Horseshoe prior machinery for edge-preserving inversion.
//!
//! The prior places conditionally Gaussian shrinkage on the increments
//! `L x` of the unknown: a global half-Cauchy scale `tau` shrinks all
//! increments toward zero while per-increment half-Cauchy scales `w_i`
//! let individual jumps escape. Conditionally on the scales the prior on
//! `x` is a Gaussian Markov random field with precision
//!
//! ```text
//! Lam = L' W L,    W = diag(1 / (tau^2 w_i^2)),
//! ```
//!
//! which is positive definite thanks to the zero boundary rows of `L`.
//! The half-Cauchy (more generally half-t) scales are represented as a
//! mixture of two chained inverse-gamma variables so every conditional
//! in the Gibbs sweep stays in closed form.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::operators::{DifferenceOperator, Dimensionality};
use crate::{lapack, Error, Result};

/// Lower clamp applied to variances before forming precision weights;
/// strong shrinkage routinely underflows local variances and the weight
/// `1 / (tau^2 w_i^2)` must stay finite.
pub const VARIANCE_FLOOR: f64 = 1e-30;

/// Lower clamp on the combined increment variance `tau^2 w_i^2`. The
/// global and local scales can collapse simultaneously (deep shrinkage on
/// flat regions), and per-variance clamps still allow products near
/// 1e-60, i.e. precision weights near 1e60. Rows that large inject
/// rounding error of order `eps * weight` into every other pivot of the
/// posterior precision, which loses positive definiteness in double
/// precision once the weight spread passes ~1e16; they also blow up the
/// condition number of the whitened least-squares stack, which stalls
/// unpreconditioned CGLS. Flooring the product at 1e-10 caps weights at
/// 1e10 (safely factorable next to O(1) data terms, and mild enough that
/// CGLS converges at practical tolerances) while pinning the increment to
/// a standard deviation of 1e-5. That is several orders of magnitude
/// below the smallest increment the data can resolve in any supported
/// geometry (noise over forward-column norm is ~1e-2 .. 1e-3 here), so
/// the floor is statistically invisible.
pub const INCREMENT_VARIANCE_FLOOR: f64 = 1e-10;

/// Combined variance of one increment, `tau^2 w_i^2`, with both the
/// per-variance and the product floors applied.
fn increment_variance(tau2: f64, w2: f64) -> f64 {
    (clamp_variance(tau2) * clamp_variance(w2)).max(INCREMENT_VARIANCE_FLOOR)
}

/// How the scale of the global half-Cauchy hyperprior is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau0Mode {
    /// A fixed scale value.
    Fixed(f64),
    /// The scale tracks the current noise draw: `tau0^2 = sigma2_obs`
    /// at every Gibbs iteration.
    CoupledToNoise,
}

/// Hyperparameters of the hierarchical prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorseshoeParams {
    /// Degrees of freedom of the half-t scale priors; 1 is the standard
    /// horseshoe (half-Cauchy scales).
    pub nu: f64,
    pub tau0: Tau0Mode,
    /// Shape of the inverse-gamma noise prior.
    pub alpha_obs: f64,
    /// The noise prior is IG(alpha_obs, 1 / beta_obs); large `beta_obs`
    /// makes it relatively uninformative.
    pub beta_obs: f64,
}

impl Default for HorseshoeParams {
    fn default() -> Self {
        HorseshoeParams {
            nu: 1.0,
            tau0: Tau0Mode::CoupledToNoise,
            alpha_obs: 1.0,
            beta_obs: 1e4,
        }
    }
}

impl HorseshoeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 1.0) {
            return Err(Error::invalid(format!(
                "degrees of freedom must be >= 1, got {}",
                self.nu
            )));
        }
        if let Tau0Mode::Fixed(t0) = self.tau0 {
            if !(t0 > 0.0) {
                return Err(Error::invalid(format!("fixed tau0 must be positive, got {t0}")));
            }
        }
        if !(self.alpha_obs > 0.0) || !(self.beta_obs > 0.0) {
            return Err(Error::invalid("noise prior shape and scale must be positive"));
        }
        Ok(())
    }
}

/// Sparsity-based guideline for a fixed `tau0`: with `d0` expected
/// relevant components out of `d`, use `tau0 = d0 / (d - d0) * sigma`.
pub fn tau0_sparsity_rule(d0: usize, d: usize, sigma_obs: f64) -> f64 {
    assert!(d0 > 0 && d0 < d, "need 0 < d0 < d");
    d0 as f64 / (d - d0) as f64 * sigma_obs
}

/// Current values of all non-target variables in the Gibbs sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperState {
    pub sigma2_obs: f64,
    pub tau2: f64,
    /// Local increment variances, length `k`.
    pub w2: Vec<f64>,
    /// Auxiliary mixing variable of the global scale.
    pub gamma: f64,
    /// Auxiliary mixing variables of the local scales, length `k`.
    pub xi: Vec<f64>,
}

impl HyperState {
    /// All-ones starting point used by every chain.
    pub fn initial(k: usize) -> Self {
        HyperState {
            sigma2_obs: 1.0,
            tau2: 1.0,
            w2: vec![1.0; k],
            gamma: 1.0,
            xi: vec![1.0; k],
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sigma2_obs > 0.0
            && self.tau2 > 0.0
            && self.gamma > 0.0
            && self.w2.iter().all(|&v| v > 0.0)
            && self.xi.iter().all(|&v| v > 0.0)
    }
}

/// Clamps a variance away from zero before it enters a denominator.
pub fn clamp_variance(v: f64) -> f64 {
    v.max(VARIANCE_FLOOR)
}

/// Diagonal of `W`: `1 / (tau^2 w_i^2)` with clamped variances and a
/// floored product.
pub fn increment_weights(tau2: f64, w2: &[f64]) -> Vec<f64> {
    w2.iter()
        .map(|&w| 1.0 / increment_variance(tau2, w))
        .collect()
}

/// Diagonal of `W^{1/2}`: `1 / (tau w_i)`, square-root consistent with
/// `increment_weights` so factor-based and weight-based assemblies agree.
pub fn increment_scales(tau2: f64, w2: &[f64]) -> Vec<f64> {
    w2.iter()
        .map(|&w| 1.0 / increment_variance(tau2, w).sqrt())
        .collect()
}

/// Dense prior precision `Lam = L' W L`. Quadratic storage; intended for
/// the direct sampler (which adds it onto the data term) and for tests.
pub fn assemble_precision(l: &DifferenceOperator, tau2: f64, w2: &[f64]) -> Array2<f64> {
    let weights = increment_weights(tau2, w2);
    let mut lam = Array2::zeros((l.unknowns(), l.unknowns()));
    l.add_weighted_gram(&weights, &mut lam);
    lam
}

/// Triangular factor `C` with `C' C = Lam`.
///
/// In 1D the factor is `W^{1/2} D` itself, lower bidiagonal, stored as
/// its row scales. In 2D it is the `R` factor of the thin QR
/// factorization of `W^{1/2} L` (the orthogonal factor is never formed),
/// upper triangular with nonnegative diagonal.
#[derive(Debug, Clone)]
pub enum CholFactor {
    /// Lower bidiagonal `C` with `C[i][i] = scale[i]` and
    /// `C[i][i-1] = -scale[i]`.
    Bidiagonal { scale: Vec<f64> },
    /// Dense upper-triangular `R`.
    DenseUpper(Array2<f64>),
}

impl CholFactor {
    pub fn dim(&self) -> usize {
        match self {
            CholFactor::Bidiagonal { scale } => scale.len(),
            CholFactor::DenseUpper(r) => r.nrows(),
        }
    }

    /// Solves `C z = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        match self {
            CholFactor::Bidiagonal { scale } => {
                let mut prev = 0.0;
                for (bi, si) in b.iter_mut().zip(scale) {
                    prev = *bi / si + prev;
                    *bi = prev;
                }
            }
            CholFactor::DenseUpper(r) => lapack::solve_upper(r, b),
        }
    }

    /// Solves `C' z = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        match self {
            CholFactor::Bidiagonal { scale } => {
                let n = scale.len();
                b[n - 1] /= scale[n - 1];
                for i in (0..n - 1).rev() {
                    b[i] = (b[i] + scale[i + 1] * b[i + 1]) / scale[i];
                }
            }
            CholFactor::DenseUpper(r) => lapack::solve_upper_transpose(r, b),
        }
    }

    /// Computes `C v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            CholFactor::Bidiagonal { scale } => {
                let mut out = Vec::with_capacity(scale.len());
                let mut prev = 0.0;
                for (vi, si) in v.iter().zip(scale) {
                    out.push(si * (vi - prev));
                    prev = *vi;
                }
                out
            }
            CholFactor::DenseUpper(r) => {
                let n = r.nrows();
                let mut out = vec![0.0; n];
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in i..n {
                        acc += r[[i, j]] * v[j];
                    }
                    out[i] = acc;
                }
                out
            }
        }
    }

    /// Dense form of the factor, for tests and small problems.
    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            CholFactor::Bidiagonal { scale } => {
                let n = scale.len();
                let mut c = Array2::zeros((n, n));
                for i in 0..n {
                    c[[i, i]] = scale[i];
                    if i > 0 {
                        c[[i, i - 1]] = -scale[i];
                    }
                }
                c
            }
            CholFactor::DenseUpper(r) => r.clone(),
        }
    }
}

/// Builds the triangular factor of the prior precision for the given
/// scales, dispatching on the operator's dimensionality.
pub fn cholesky_factor(l: &DifferenceOperator, tau2: f64, w2: &[f64]) -> Result<CholFactor> {
    if w2.len() != l.increments() {
        return Err(Error::dim("local variances", l.increments(), w2.len()));
    }
    let scales = increment_scales(tau2, w2);
    match l.dimensionality() {
        Dimensionality::One => Ok(CholFactor::Bidiagonal { scale: scales }),
        Dimensionality::Two => {
            let stacked = l.scaled_dense(&scales);
            let r = lapack::qr_r_factor(stacked.view())?;
            for i in 0..r.nrows() {
                if !(r[[i, i]] > 0.0) {
                    return Err(Error::Numerical(format!(
                        "rank-deficient prior precision factor at column {i}"
                    )));
                }
            }
            Ok(CholFactor::DenseUpper(r))
        }
    }
}

/// Log density of the half-Cauchy distribution with the given scale,
/// including its normalizing constant `2 / (pi scale)`.
pub fn half_cauchy_log_density(x: f64, scale: f64) -> f64 {
    assert!(scale > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = x / scale;
    (2.0 / (std::f64::consts::PI * scale)).ln() - (1.0 + z * z).ln()
}

/// Shrinkage coefficient `kappa = 1 / (1 + sigma^2)`; 1 means full
/// shrinkage of the component, 0 none.
pub fn shrinkage_coefficient(sigma: f64) -> f64 {
    1.0 / (1.0 + sigma * sigma)
}

/// Analytic envelope of the standard one-dimensional horseshoe marginal
/// density: `lower(x) <= pi(x) <= upper(x)` for `x != 0`, where
///
/// ```text
/// lower(x) = 1 / (2 sqrt(2 pi^3)) * ln(1 + 4 / x^2)
/// upper(x) = 1 /    sqrt(2 pi^3)  * ln(1 + 2 / x^2)
/// ```
///
/// The density itself has no closed form; both bounds share its
/// logarithmic pole at the origin and its tail decay.
pub fn horseshoe_density_bounds(x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Err(Error::invalid("horseshoe density bounds have a pole at zero"));
    }
    let k = 1.0 / (2.0 * std::f64::consts::PI.powi(3)).sqrt();
    let x2 = x * x;
    let lower = 0.5 * k * (1.0 + 4.0 / x2).ln();
    let upper = k * (1.0 + 2.0 / x2).ln();
    Ok((lower, upper))
}

/// One draw from IG(shape, scale), the inverse-gamma distribution with
/// density proportional to `x^{-shape-1} exp(-scale / x)`, via the
/// reciprocal of a gamma draw.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && scale > 0.0);
    // rand_distr's Gamma takes (shape, scale); a gamma with rate `scale`
    // is Gamma(shape, 1 / scale).
    let gamma = Gamma::new(shape, 1.0 / scale).expect("valid gamma parameters");
    1.0 / gamma.sample(rng)
}

/// One draw of a half-t(nu, scale) variable through its chained
/// inverse-gamma mixture: `b ~ IG(1/2, 1/c^2)`, `a^2 | b ~ IG(nu/2, nu/b)`,
/// `a = sqrt(a^2)`. For `nu = 1` the law is half-Cauchy(c).
pub fn sample_scale_mixture<R: Rng + ?Sized>(nu: f64, c: f64, rng: &mut R) -> f64 {
    debug_assert!(nu >= 1.0 && c > 0.0);
    let b = sample_inverse_gamma(0.5, 1.0 / (c * c), rng);
    let a2 = sample_inverse_gamma(0.5 * nu, nu / b, rng);
    a2.sqrt()
}
