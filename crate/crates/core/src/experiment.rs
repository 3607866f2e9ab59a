//! End-to-end experiment driver: phantom generation, synthetic data,
//! sampler orchestration, Tikhonov reference solves, and artifact export.
//!
//! One master seed drives everything. The Gibbs conditionals use RNG
//! streams 0-5 (inside the sampler), data noise uses stream 6 and
//! phantom generation stream 7, so any artifact is reproducible
//! bit-for-bit from the configuration alone.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{self, ChainSummary};
use crate::io;
use crate::operators::{
    forward_data, ConvolutionModel1D, DifferenceOperator, Dimensionality, FanBeamProjector,
    LinearOperator, SeparableBlurModel2D,
};
use crate::prior::{HorseshoeParams, Tau0Mode};
use crate::sampler::{run_gibbs, GibbsConfig, Pi1Strategy, StorageMode};
use crate::solver::cgls;
use crate::{Error, Result};

/// Gaussian kernel width of the reference 1D deconvolution problem.
pub const CONV_KERNEL_WIDTH: f64 = 0.016;

/// Calibration target for the 1D phantom amplitude: the blurred signal
/// satisfies `||Ax||_2 / sqrt(m) = 0.39335`, so the reference 2% noise
/// level corresponds to a noise standard deviation of 7.867e-3.
pub const TARGET_BLURRED_RMS: f64 = 0.39335;

const GRAIN_SEED_COUNT: usize = 30;
const GRAIN_PALETTE: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

/// RNG stream indices reserved outside the sampler's 0-5.
const NOISE_STREAM: u64 = 6;
const PHANTOM_STREAM: u64 = 7;

/// Which inverse problem an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Deconv1d,
    Deblur2d,
    Ct2d,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProblemKind::Deconv1d => "deconv1d",
            ProblemKind::Deblur2d => "deblur2d",
            ProblemKind::Ct2d => "ct2d",
        };
        f.write_str(s)
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deconv1d" => Ok(ProblemKind::Deconv1d),
            "deblur2d" => Ok(ProblemKind::Deblur2d),
            "ct2d" => Ok(ProblemKind::Ct2d),
            other => Err(Error::Config(format!("unknown problem {other:?}"))),
        }
    }
}

/// Ground-truth image family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    PiecewiseConstant1d,
    GeometricShapes2d,
    Grains2d,
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhantomKind::PiecewiseConstant1d => "piecewise1d",
            PhantomKind::GeometricShapes2d => "shapes2d",
            PhantomKind::Grains2d => "grains2d",
        };
        f.write_str(s)
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "piecewise1d" => Ok(PhantomKind::PiecewiseConstant1d),
            "shapes2d" => Ok(PhantomKind::GeometricShapes2d),
            "grains2d" => Ok(PhantomKind::Grains2d),
            other => Err(Error::Config(format!("unknown phantom kind {other:?}"))),
        }
    }
}

/// A ground-truth signal or image together with how it was made.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub kind: PhantomKind,
    /// 1D: the signal; 2D: column-major image, pixel `(r, c)` at `c*n + r`.
    pub values: Vec<f64>,
    /// Human-readable generation parameters, recorded in reports.
    pub descriptor: String,
}

/// Relative breakpoints and levels of the 1D piecewise-constant shape:
/// flat zero regions separating blocks of distinct heights, 7 jumps.
const PIECEWISE_PATTERN: [(f64, f64); 8] = [
    (0.0, 0.0),
    (13.0 / 128.0, 0.8),
    (32.0 / 128.0, 0.0),
    (45.0 / 128.0, 1.0),
    (70.0 / 128.0, 0.4),
    (83.0 / 128.0, 0.0),
    (96.0 / 128.0, 0.6),
    (115.0 / 128.0, 0.0),
];

/// Builds a deterministic phantom. `n` is the signal length (1D) or the
/// grid side (2D); `seed` matters only for the grains family.
pub fn make_phantom(kind: PhantomKind, n: usize, seed: u64) -> Result<Phantom> {
    match kind {
        PhantomKind::PiecewiseConstant1d => piecewise_phantom(n),
        PhantomKind::GeometricShapes2d => shapes_phantom(n),
        PhantomKind::Grains2d => grains_phantom(n, seed),
    }
}

fn piecewise_phantom(d: usize) -> Result<Phantom> {
    if d < 32 {
        return Err(Error::invalid("piecewise phantom needs length >= 32"));
    }
    let mut values = vec![0.0; d];
    for (i, &(frac, level)) in PIECEWISE_PATTERN.iter().enumerate() {
        let start = (frac * d as f64).round() as usize;
        let end = if i + 1 < PIECEWISE_PATTERN.len() {
            (PIECEWISE_PATTERN[i + 1].0 * d as f64).round() as usize
        } else {
            d
        };
        values[start..end].fill(level);
    }
    // Scale the amplitude so the blurred signal hits the calibration
    // target; the factor is < 1, keeping values inside [0, 1].
    let op = ConvolutionModel1D::new(d, CONV_KERNEL_WIDTH)?;
    let mut blurred = vec![0.0; d];
    op.apply(&values, &mut blurred);
    let rms = (blurred.iter().map(|v| v * v).sum::<f64>() / d as f64).sqrt();
    let scale = TARGET_BLURRED_RMS / rms;
    for v in values.iter_mut() {
        *v *= scale;
    }
    Ok(Phantom {
        kind: PhantomKind::PiecewiseConstant1d,
        values,
        descriptor: format!("piecewise-constant signal, d={d}, 7 jumps, amplitude scale {scale}"),
    })
}

fn shapes_phantom(n: usize) -> Result<Phantom> {
    if n < 10 {
        return Err(Error::invalid("shapes phantom needs grid side >= 10"));
    }
    let nf = n as f64;
    let mut values = vec![0.0; n * n];
    // A rectangle and a disk of distinct constant intensities on a zero
    // background, both scaled with the grid.
    let (r0, r1) = ((0.15 * nf).round() as usize, (0.45 * nf).round() as usize);
    let (c0, c1) = ((0.12 * nf).round() as usize, (0.50 * nf).round() as usize);
    for c in c0..c1 {
        for r in r0..r1 {
            values[c * n + r] = 1.0;
        }
    }
    let (cy, cx, rad) = (0.65 * nf, 0.62 * nf, 0.18 * nf);
    for c in 0..n {
        for r in 0..n {
            let dy = r as f64 + 0.5 - cy;
            let dx = c as f64 + 0.5 - cx;
            if dy * dy + dx * dx <= rad * rad {
                values[c * n + r] = 0.55;
            }
        }
    }
    Ok(Phantom {
        kind: PhantomKind::GeometricShapes2d,
        values,
        descriptor: format!("rectangle (1.0) and disk (0.55) on zero background, n={n}"),
    })
}

fn grains_phantom(n: usize, seed: u64) -> Result<Phantom> {
    if n < 4 {
        return Err(Error::invalid("grains phantom needs grid side >= 4"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PHANTOM_STREAM);
    let count = GRAIN_SEED_COUNT.min(n * n / 4);
    let nf = n as f64;
    let sites: Vec<(f64, f64)> =
        (0..count).map(|_| (rng.gen_range(0.0..nf), rng.gen_range(0.0..nf))).collect();
    let shades: Vec<f64> =
        (0..count).map(|_| GRAIN_PALETTE[rng.gen_range(0..GRAIN_PALETTE.len())]).collect();
    let mut values = vec![0.0; n * n];
    for c in 0..n {
        for r in 0..n {
            let (py, px) = (r as f64 + 0.5, c as f64 + 0.5);
            let mut best = 0usize;
            let mut best_d2 = f64::INFINITY;
            for (i, &(sy, sx)) in sites.iter().enumerate() {
                let d2 = (py - sy) * (py - sy) + (px - sx) * (px - sx);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = i;
                }
            }
            values[c * n + r] = shades[best];
        }
    }
    Ok(Phantom {
        kind: PhantomKind::Grains2d,
        values,
        descriptor: format!("Voronoi grains, n={n}, {count} cells, 5-level palette, seed {seed}"),
    })
}

/// Indices of the nonzero increments of `values` under `l`. For the 1D
/// operator these are the jump locations; for 2D, the within-column
/// block (first `d` rows) then the across-column block mark pixel pairs
/// of unequal intensity.
pub fn nonzero_increments(l: &DifferenceOperator, values: &[f64]) -> Vec<usize> {
    let mut inc = vec![0.0; l.increments()];
    l.apply(values, &mut inc);
    inc.iter().enumerate().filter(|(_, v)| v.abs() > 1e-12).map(|(i, _)| i).collect()
}

/// Anisotropic total variation `sum_i |[Lx]_i|`.
pub fn total_variation(l: &DifferenceOperator, values: &[f64]) -> f64 {
    let mut inc = vec![0.0; l.increments()];
    l.apply(values, &mut inc);
    inc.iter().map(|v| v.abs()).sum()
}

/// Everything needed to run one experiment end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Signal length (1D) or grid side (2D).
    pub n: usize,
    /// Relative noise level; the noise std is `level * ||Ax|| / sqrt(m)`.
    pub noise_level: f64,
    pub phantom: PhantomKind,
    /// Fan-beam detector element count (CT only).
    pub detectors: usize,
    /// Fan-beam view count (CT only).
    pub views: usize,
    pub params: HorseshoeParams,
    pub gibbs: GibbsConfig,
    pub out_dir: PathBuf,
    /// Also solve a discrepancy-principle Tikhonov reference problem
    /// and report its error next to the posterior estimates.
    pub baseline: bool,
}

impl ExperimentConfig {
    /// Reference settings for each problem family.
    pub fn default_for(problem: ProblemKind) -> Self {
        let mut gibbs = GibbsConfig::default();
        let (n, noise_level, phantom, baseline) = match problem {
            ProblemKind::Deconv1d => (128, 0.02, PhantomKind::PiecewiseConstant1d, true),
            ProblemKind::Deblur2d => {
                gibbs.burn_in = 4000;
                (32, 0.01, PhantomKind::GeometricShapes2d, false)
            }
            ProblemKind::Ct2d => {
                gibbs.burn_in = 4000;
                (64, 0.01, PhantomKind::Grains2d, false)
            }
        };
        ExperimentConfig {
            problem,
            n,
            noise_level,
            phantom,
            detectors: 64,
            views: 32,
            params: HorseshoeParams::default(),
            gibbs,
            out_dir: PathBuf::from("out"),
            baseline,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_level > 0.0) {
            return Err(Error::Config("noise level must be positive".into()));
        }
        let phantom_matches = match self.problem {
            ProblemKind::Deconv1d => self.phantom == PhantomKind::PiecewiseConstant1d,
            _ => self.phantom != PhantomKind::PiecewiseConstant1d,
        };
        if !phantom_matches {
            return Err(Error::Config(format!(
                "phantom {} does not fit problem {}",
                self.phantom, self.problem
            )));
        }
        if self.problem == ProblemKind::Ct2d && (self.detectors == 0 || self.views == 0) {
            return Err(Error::Config("CT needs positive detector and view counts".into()));
        }
        self.params.validate()?;
        self.gibbs.validate()
    }

    /// Applies one `key = value` setting; used both by the config-file
    /// parser and by command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for key {key:?}")))
        }
        match key {
            "problem" => {
                let problem: ProblemKind = value.parse()?;
                if problem != self.problem {
                    *self = ExperimentConfig::default_for(problem);
                }
            }
            "n" | "d" => self.n = num(key, value)?,
            "noise_level" => self.noise_level = num(key, value)?,
            "phantom" => self.phantom = value.parse()?,
            "detectors" => self.detectors = num(key, value)?,
            "views" => self.views = num(key, value)?,
            "ns" => self.gibbs.n_samples = num(key, value)?,
            "nb" => self.gibbs.burn_in = num(key, value)?,
            "nt" => self.gibbs.thinning = num(key, value)?,
            "strategy" => {
                self.gibbs.strategy = value
                    .parse::<Pi1Strategy>()
                    .map_err(|_| Error::Config(format!("unknown strategy {value:?}")))?;
            }
            "tol" => self.gibbs.cgls_tol = num(key, value)?,
            "nmax" => self.gibbs.cgls_max_iter = Some(num(key, value)?),
            "seed" => self.gibbs.seed = num(key, value)?,
            "storage" => {
                self.gibbs.storage = match value {
                    "full" => StorageMode::Full,
                    "moments" => StorageMode::Moments,
                    other => {
                        return Err(Error::Config(format!("unknown storage mode {other:?}")))
                    }
                };
            }
            "tau0" => {
                self.params.tau0 = if value == "coupled" {
                    Tau0Mode::CoupledToNoise
                } else {
                    Tau0Mode::Fixed(num(key, value)?)
                };
            }
            "nu" => self.params.nu = num(key, value)?,
            "alpha_obs" => self.params.alpha_obs = num(key, value)?,
            "beta_obs" => self.params.beta_obs = num(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "baseline" => self.baseline = num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Serializes the full effective configuration back into the flat
    /// `key = value` grammar accepted by `parse_config`. Feeding the
    /// output back reproduces the run exactly, which is what failure
    /// diagnostics need.
    pub fn to_key_values(&self) -> String {
        let tau0 = match self.params.tau0 {
            Tau0Mode::CoupledToNoise => "coupled".to_string(),
            Tau0Mode::Fixed(v) => format!("{v}"),
        };
        let storage = match self.gibbs.storage {
            StorageMode::Full => "full",
            StorageMode::Moments => "moments",
        };
        let nmax = match self.gibbs.cgls_max_iter {
            Some(v) => v.to_string(),
            None => "# nmax defaults to m + d".to_string(),
        };
        let mut lines = vec![
            format!("problem = {}", self.problem),
            format!("n = {}", self.n),
            format!("noise_level = {}", self.noise_level),
            format!("phantom = {}", self.phantom),
        ];
        if self.problem == ProblemKind::Ct2d {
            lines.push(format!("detectors = {}", self.detectors));
            lines.push(format!("views = {}", self.views));
        }
        lines.extend([
            format!("nu = {}", self.params.nu),
            format!("tau0 = {tau0}"),
            format!("alpha_obs = {}", self.params.alpha_obs),
            format!("beta_obs = {}", self.params.beta_obs),
            format!("ns = {}", self.gibbs.n_samples),
            format!("nb = {}", self.gibbs.burn_in),
            format!("nt = {}", self.gibbs.thinning),
            format!("strategy = {}", self.gibbs.strategy),
            format!("tol = {}", self.gibbs.cgls_tol),
            if self.gibbs.cgls_max_iter.is_some() {
                format!("nmax = {nmax}")
            } else {
                nmax
            },
            format!("seed = {}", self.gibbs.seed),
            format!("storage = {storage}"),
            format!("out = {}", self.out_dir.display()),
            format!("baseline = {}", self.baseline),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

/// Parses the flat `key = value` configuration grammar: one setting per
/// line, `#` starts a comment, blank lines ignored. A `problem` line
/// resets every other key to that problem's defaults, so it should come
/// first; later keys override.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default_for(ProblemKind::Deconv1d);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        cfg.set(key.trim(), value.trim())?;
    }
    Ok(cfg)
}

/// Scalar results of one experiment; also serialized to `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub problem: String,
    pub phantom: String,
    pub n: usize,
    pub unknowns: usize,
    pub measurements: usize,
    pub noise_level: f64,
    pub sigma_true: f64,
    pub seed: u64,
    pub strategy: String,
    pub n_samples: usize,
    pub relerr_mean: f64,
    /// Absent when only running moments are stored.
    pub relerr_median: Option<f64>,
    /// Summary of the noise standard deviation chain.
    pub sigma_obs: ChainSummary,
    /// Summary of the global scale chain.
    pub tau: ChainSummary,
    pub mean_cgls_iterations: Option<f64>,
    pub cgls_nonconverged: usize,
    pub baseline_lambda: Option<f64>,
    pub baseline_relerr: Option<f64>,
    /// PGM normalization constants for the exported images.
    pub pgm_max_mean: Option<f64>,
    pub pgm_max_std: Option<f64>,
}

/// Runs the configured experiment and writes all artifacts into
/// `out_dir`: phantom and data, point estimates with uncertainty maps,
/// hyperparameter chains (on standard-deviation scale), the local
/// weight map, the CGLS iteration trace, `summary.json` and a
/// plain-text report. Returns the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let phantom = make_phantom(cfg.phantom, cfg.n, cfg.gibbs.seed)?;

    let (op, l): (Box<dyn LinearOperator>, DifferenceOperator) = match cfg.problem {
        ProblemKind::Deconv1d => (
            Box::new(ConvolutionModel1D::new(cfg.n, CONV_KERNEL_WIDTH)?),
            DifferenceOperator::new(Dimensionality::One, cfg.n)?,
        ),
        ProblemKind::Deblur2d => (
            Box::new(SeparableBlurModel2D::new(cfg.n)?),
            DifferenceOperator::new(Dimensionality::Two, cfg.n)?,
        ),
        ProblemKind::Ct2d => (
            Box::new(FanBeamProjector::new(cfg.n, cfg.detectors, cfg.views)?),
            DifferenceOperator::new(Dimensionality::Two, cfg.n)?,
        ),
    };
    let (m, d) = (op.nrows(), op.ncols());

    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.gibbs.seed);
    noise_rng.set_stream(NOISE_STREAM);
    let (y, sigma_true) = forward_data(op.as_ref(), &phantom.values, cfg.noise_level, &mut noise_rng);

    let out = run_gibbs(op.as_ref(), &l, &y, &cfg.params, &cfg.gibbs)?;

    let sigma_chain: Vec<f64> = out.sigma2_chain.iter().map(|v| v.sqrt()).collect();
    let tau_chain: Vec<f64> = out.tau2_chain.iter().map(|v| v.sqrt()).collect();
    let sigma_obs = diagnostics::summarize(&sigma_chain)?;
    let tau = diagnostics::summarize(&tau_chain)?;
    let relerr_mean = diagnostics::relative_error(&out.x_mean, &phantom.values);
    let x_median = out.x_samples.as_ref().map(|s| columnwise_median(s, d));
    let relerr_median =
        x_median.as_ref().map(|xm| diagnostics::relative_error(xm, &phantom.values));

    let (baseline_lambda, baseline_relerr) = if cfg.baseline {
        let (lambda, x_tik) = discrepancy_tikhonov(op.as_ref(), &l, &y, sigma_true)?;
        (Some(lambda), Some(diagnostics::relative_error(&x_tik, &phantom.values)))
    } else {
        (None, None)
    };

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    io::write_vector_csv(&dir.join("phantom.csv"), &phantom.values)?;
    match cfg.problem {
        ProblemKind::Deconv1d | ProblemKind::Deblur2d => {
            io::write_vector_csv(&dir.join("data.csv"), &y)?;
        }
        // Sinogram rows are detector elements, columns are views.
        ProblemKind::Ct2d => {
            let rows = io::column_major_to_rows(&y, cfg.detectors, cfg.views);
            io::write_matrix_csv(&dir.join("data.csv"), &rows, cfg.detectors, cfg.views)?;
        }
    }
    io::write_vector_csv(&dir.join("x_mean.csv"), &out.x_mean)?;
    io::write_vector_csv(&dir.join("x_std.csv"), &out.x_std)?;
    io::write_vector_csv(&dir.join("w_mean.csv"), &out.w_mean)?;
    if let Some(xm) = &x_median {
        io::write_vector_csv(&dir.join("x_median.csv"), xm)?;
    }
    io::write_vector_csv(&dir.join("chain_sigma.csv"), &sigma_chain)?;
    io::write_vector_csv(&dir.join("chain_tau.csv"), &tau_chain)?;
    let iters: Vec<f64> = out.cgls_iterations.iter().map(|&v| v as f64).collect();
    io::write_vector_csv(&dir.join("cgls_iters.csv"), &iters)?;

    let (pgm_max_mean, pgm_max_std) = if cfg.problem != ProblemKind::Deconv1d {
        let n = cfg.n;
        let mean_max = positive_max(&out.x_mean);
        let std_max = positive_max(&out.x_std);
        let mean_rows = io::column_major_to_rows(&out.x_mean, n, n);
        let std_rows = io::column_major_to_rows(&out.x_std, n, n);
        let phantom_rows = io::column_major_to_rows(&phantom.values, n, n);
        io::write_pgm(&dir.join("x_mean.pgm"), &mean_rows, n, n, mean_max)?;
        io::write_pgm(&dir.join("x_std.pgm"), &std_rows, n, n, std_max)?;
        io::write_pgm(&dir.join("phantom.pgm"), &phantom_rows, n, n, positive_max(&phantom.values))?;
        (Some(mean_max), Some(std_max))
    } else {
        (None, None)
    };

    let summary = ExperimentSummary {
        problem: cfg.problem.to_string(),
        phantom: phantom.descriptor.clone(),
        n: cfg.n,
        unknowns: d,
        measurements: m,
        noise_level: cfg.noise_level,
        sigma_true,
        seed: cfg.gibbs.seed,
        strategy: cfg.gibbs.strategy.to_string(),
        n_samples: out.n_samples(),
        relerr_mean,
        relerr_median,
        sigma_obs,
        tau,
        mean_cgls_iterations: if out.cgls_iterations.is_empty() {
            None
        } else {
            Some(out.mean_cgls_iterations())
        },
        cgls_nonconverged: out.cgls_nonconverged,
        baseline_lambda,
        baseline_relerr,
        pgm_max_mean,
        pgm_max_std,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::invalid(format!("summary encoding failed: {e}")))?;
    fs::write(dir.join("summary.json"), json)?;
    fs::write(dir.join("report.txt"), render_report(&summary))?;
    Ok(summary)
}

fn positive_max(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(0.0f64, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn columnwise_median(samples: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut column = vec![0.0; samples.len()];
    (0..d)
        .map(|j| {
            for (s, slot) in samples.iter().zip(column.iter_mut()) {
                *slot = s[j];
            }
            diagnostics::median(&column)
        })
        .collect()
}

fn render_report(s: &ExperimentSummary) -> String {
    let mut r = String::new();
    r.push_str(&format!("problem: {} ({} unknowns, {} measurements)\n", s.problem, s.unknowns, s.measurements));
    r.push_str(&format!("phantom: {}\n", s.phantom));
    r.push_str(&format!("seed: {}\n", s.seed));
    r.push_str(&format!("noise level: {} (true sigma {:.6e})\n", s.noise_level, s.sigma_true));
    r.push_str(&format!("strategy: {}, stored samples: {}\n", s.strategy, s.n_samples));
    r.push_str(&format!("relerr(mean): {:.6e}\n", s.relerr_mean));
    if let Some(v) = s.relerr_median {
        r.push_str(&format!("relerr(median): {v:.6e}\n"));
    }
    r.push_str(&format!(
        "sigma_obs: mean {:.6e}, 95% CI [{:.6e}, {:.6e}], IACT {:.3}, n_eff {}\n",
        s.sigma_obs.mean, s.sigma_obs.ci95.0, s.sigma_obs.ci95.1, s.sigma_obs.iact, s.sigma_obs.n_eff
    ));
    r.push_str(&format!(
        "tau: mean {:.6e}, 95% CI [{:.6e}, {:.6e}], IACT {:.3}, n_eff {}\n",
        s.tau.mean, s.tau.ci95.0, s.tau.ci95.1, s.tau.iact, s.tau.n_eff
    ));
    if let Some(iters) = s.mean_cgls_iterations {
        r.push_str(&format!(
            "cgls: mean iterations {:.2}, nonconverged sweeps {}\n",
            iters, s.cgls_nonconverged
        ));
    }
    if let (Some(lambda), Some(err)) = (s.baseline_lambda, s.baseline_relerr) {
        r.push_str(&format!("tikhonov baseline: lambda {lambda:.6e}, relerr {err:.6e}\n"));
    }
    r
}

/// Augmented least-squares operator `[A; sqrt(lambda) L]`.
struct TikhonovStack<'a> {
    op: &'a dyn LinearOperator,
    l: &'a DifferenceOperator,
    sqrt_lambda: f64,
}

impl LinearOperator for TikhonovStack<'_> {
    fn nrows(&self) -> usize {
        self.op.nrows() + self.l.increments()
    }

    fn ncols(&self) -> usize {
        self.op.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.op.nrows();
        self.op.apply(x, &mut y[..m]);
        self.l.apply(x, &mut y[m..]);
        for v in y[m..].iter_mut() {
            *v *= self.sqrt_lambda;
        }
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        let m = self.op.nrows();
        self.op.apply_adjoint(&y[..m], x);
        let mut tmp = vec![0.0; self.l.unknowns()];
        self.l.apply_adjoint(&y[m..], &mut tmp);
        for (xi, ti) in x.iter_mut().zip(&tmp) {
            *xi += self.sqrt_lambda * ti;
        }
    }
}

/// Solves `min ||Ax - y||^2 + lambda ||Lx||^2` by CGLS on the stacked
/// least-squares form. Used only for reference comparisons in reports.
pub fn tikhonov_baseline(
    op: &dyn LinearOperator,
    l: &DifferenceOperator,
    y: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    if lambda < 0.0 {
        return Err(Error::invalid("regularization parameter must be nonnegative"));
    }
    let stack = TikhonovStack { op, l, sqrt_lambda: lambda.sqrt() };
    let mut z = vec![0.0; stack.nrows()];
    z[..y.len()].copy_from_slice(y);
    let max_iter = stack.nrows() + stack.ncols();
    Ok(cgls(&stack, &z, None, 1e-10, max_iter).x)
}

/// Picks the Tikhonov parameter by the discrepancy principle: bisection
/// on `log lambda` until `||Ax_lambda - y||` matches the noise norm
/// `sqrt(m) sigma`. The data misfit grows monotonically with `lambda`.
pub fn discrepancy_tikhonov(
    op: &dyn LinearOperator,
    l: &DifferenceOperator,
    y: &[f64],
    sigma: f64,
) -> Result<(f64, Vec<f64>)> {
    let m = op.nrows();
    let target = (m as f64).sqrt() * sigma;
    let misfit = |lambda: f64| -> Result<(f64, Vec<f64>)> {
        let x = tikhonov_baseline(op, l, y, lambda)?;
        let mut ax = vec![0.0; m];
        op.apply(&x, &mut ax);
        let r = ax.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Ok((r, x))
    };
    let (mut lo, mut hi) = (1e-10f64, 1e8f64);
    let (r_lo, x_lo) = misfit(lo)?;
    if r_lo >= target {
        return Ok((lo, x_lo));
    }
    let (r_hi, x_hi) = misfit(hi)?;
    if r_hi <= target {
        return Ok((hi, x_hi));
    }
    let mut best = (lo, x_lo);
    for _ in 0..40 {
        let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
        let (r, x) = misfit(mid)?;
        if r < target {
            lo = mid;
            best = (mid, x);
        } else {
            hi = mid;
            best = (mid, x);
        }
        if (hi / lo).ln().abs() < 1e-3 {
            break;
        }
    }
    Ok(best)
}
