//! Edge-preserving Bayesian inversion with a hierarchical horseshoe prior.
//!
//! This crate implements a Gibbs sampler for linear inverse problems
//!
//! ```text
//! y = A x + e,    e ~ N(0, sigma_obs^2 I_m),
//! ```
//!
//! where the unknown `x` is a 1D signal or a (vectorized) 2D image whose
//! finite-difference increments `L x` carry a horseshoe shrinkage prior.
//! The horseshoe couples a global scale `tau` with one local scale `w_i`
//! per increment; both receive half-Cauchy hyperpriors, expressed through
//! inverse-gamma scale mixtures so that every conditional in the sampler
//! is conjugate. Sharp jumps survive the shrinkage (their local scale
//! escapes to a large value) while flat regions are pulled hard toward
//! zero increments, which is what makes the reconstructions edge-preserving.
//!
//! The crate is organized around the stages of that pipeline:
//!
//! * [`operators`] — forward models (1D convolution, separable 2D blur,
//!   fan-beam CT) and the difference operators `D`, `L`;
//! * [`prior`] — hyperparameters, increment-precision assembly
//!   `Lambda = L' W L`, its Cholesky/QR factors, and scale-mixture sampling;
//! * [`solver`] — CGLS for the least-squares subproblems;
//! * [`sampler`] — the six full conditionals and the Gibbs loop, with
//!   direct, CGLS and preconditioned-CGLS backends for the Gaussian draw;
//! * [`diagnostics`] — autocorrelation, IACT/ESS, summary statistics;
//! * [`experiment`] — phantoms, noise generation, experiment configs and
//!   the artifact-writing runner used by the CLI;
//! * [`io`] — CSV/PGM export and chain checkpointing.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lapack;
pub mod operators;
pub mod prior;
pub mod sampler;
pub mod solver;
pub mod sparse;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
