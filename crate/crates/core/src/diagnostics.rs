//! Chain post-processing: moments, quantiles, autocorrelation, effective
//! sample size, reconstruction error and robust spread summaries.
//!
//! Autocorrelation sums are truncated at the first negative lag (the
//! initial-positive-sequence rule); summing the full noisy tail instead
//! makes the integrated autocorrelation time estimate diverge. Quantiles
//! interpolate linearly between order statistics (the common "type 7"
//! convention), so an even-length median is the midpoint of the two
//! central values. The median absolute deviation is reported raw, with
//! no normal-consistency factor.

use crate::{Error, Result};

/// Sample mean.
pub fn mean(data: &[f64]) -> f64 {
    assert!(!data.is_empty());
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn sample_std(data: &[f64]) -> f64 {
    let n = data.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(data);
    let ss: f64 = data.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of unsorted data, `q` in `[0, 1]`.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    assert!(!data.is_empty());
    assert!((0.0..=1.0).contains(&q), "quantile level out of range");
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Sample median (type-7 quantile at 1/2).
pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

/// Median absolute deviation `median(|x - median(x)|)`, unscaled.
pub fn mad(data: &[f64]) -> f64 {
    let m = median(data);
    let dev: Vec<f64> = data.iter().map(|x| (x - m).abs()).collect();
    median(&dev)
}

/// Relative reconstruction error `||estimate - truth||_2 / ||truth||_2`.
pub fn relative_error(estimate: &[f64], x_true: &[f64]) -> f64 {
    assert_eq!(estimate.len(), x_true.len());
    let num: f64 = estimate
        .iter()
        .zip(x_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den
}

/// Biased sample autocorrelations `rho[0..=max_lag]`, normalized so
/// `rho[0] = 1`. A (numerically) constant chain is degenerate and
/// returns `[1, 0, 0, ...]`.
pub fn autocorrelation(chain: &[f64], max_lag: usize) -> Vec<f64> {
    let n = chain.len();
    assert!(n >= 2, "autocorrelation needs at least two states");
    let max_lag = max_lag.min(n - 1);
    let m = mean(chain);
    let c0: f64 = chain.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    let mut rho = vec![0.0; max_lag + 1];
    rho[0] = 1.0;
    if c0 <= 0.0 {
        return rho;
    }
    for (lag, r) in rho.iter_mut().enumerate().skip(1) {
        let c: f64 = chain[..n - lag]
            .iter()
            .zip(&chain[lag..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64;
        *r = c / c0;
    }
    rho
}

/// Integrated autocorrelation time `1 + 2 sum_j rho(j)`, with the sum
/// truncated at the first negative autocorrelation.
pub fn iact(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 2 {
        return 1.0;
    }
    let m = mean(chain);
    let c0: f64 = chain.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let mut acc = 0.0;
    for lag in 1..n {
        let c: f64 = chain[..n - lag]
            .iter()
            .zip(&chain[lag..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64;
        let rho = c / c0;
        if rho < 0.0 {
            break;
        }
        acc += rho;
    }
    1.0 + 2.0 * acc
}

/// Integrated autocorrelation time and the effective sample size
/// `ceil(n / tau_int)`.
pub fn effective_sample_size(chain: &[f64]) -> (f64, usize) {
    let tau = iact(chain);
    let n_eff = (chain.len() as f64 / tau).ceil() as usize;
    (tau, n_eff)
}

/// Scalar-chain summary statistics.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChainSummary {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub mad: f64,
    /// 2.5% and 97.5% quantiles.
    pub ci95: (f64, f64),
    pub iact: f64,
    pub n_eff: usize,
    /// Set when the chain is (numerically) constant, in which case the
    /// correlation-based fields are conventions rather than estimates.
    pub degenerate: bool,
}

/// Summarizes one scalar chain.
pub fn summarize(chain: &[f64]) -> Result<ChainSummary> {
    if chain.is_empty() {
        return Err(Error::invalid("cannot summarize an empty chain"));
    }
    let mut sorted = chain.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = quantile_sorted(&sorted, 0.5);
    let std = sample_std(chain);
    let (tau, n_eff) = if chain.len() >= 2 {
        effective_sample_size(chain)
    } else {
        (1.0, 1)
    };
    Ok(ChainSummary {
        mean: mean(chain),
        median: med,
        std,
        mad: mad(chain),
        ci95: (quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975)),
        iact: tau,
        n_eff,
        degenerate: std == 0.0,
    })
}
