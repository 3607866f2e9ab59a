//! Sparse fan-beam tomography projector with ray-driven traversal.
//!
//! The image is an `N x N` grid of unit pixels covering the square
//! `[-N/2, N/2]^2`. For each of `q` equidistant view angles in
//! `[0, 2 pi)` the X-ray source sits at distance `3 N` from the origin
//! and a flat detector of width `N` (so `p` elements of pitch `N / p`)
//! sits at distance `N` on the opposite side, perpendicular to the
//! source axis. One matrix row per source-to-detector-element ray holds
//! the exact intersection lengths of that ray with the pixels it
//! crosses, found by walking the sorted grid-line crossings of the ray
//! parameter. Rays missing the image leave zero rows.
//!
//! Row `i * p + l` belongs to angle index `i` and detector element `l`,
//! which makes the `m`-vector a column-major `p x q` sinogram.

use ndarray::Array2;

use super::LinearOperator;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Source-to-origin distance in units of the image side `N`.
const SOURCE_DIST_FACTOR: f64 = 3.0;

/// Detector-center-to-origin distance in units of `N`.
const DETECTOR_DIST_FACTOR: f64 = 1.0;

/// Detector array width in units of `N`.
const DETECTOR_SPAN_FACTOR: f64 = 1.0;

/// Segments shorter than this are grid-line touching artifacts and carry
/// no length worth storing.
const MIN_SEGMENT: f64 = 1e-12;

/// Sparse fan-beam projection operator (`m = p * q`, `d = N * N`).
#[derive(Debug, Clone)]
pub struct FanBeamProjector {
    n: usize,
    p: usize,
    q: usize,
    matrix: CsrMatrix,
}

impl FanBeamProjector {
    pub fn new(n: usize, p: usize, q: usize) -> Result<Self> {
        if n < 1 || p < 1 || q < 1 {
            return Err(Error::invalid(format!(
                "fan-beam geometry needs positive sizes, got N={n}, p={p}, q={q}"
            )));
        }
        let nf = n as f64;
        let half = nf / 2.0;
        let source_dist = SOURCE_DIST_FACTOR * nf;
        let detector_dist = DETECTOR_DIST_FACTOR * nf;
        let pitch = DETECTOR_SPAN_FACTOR * nf / p as f64;
        let mut triplets = Vec::new();
        let mut ts: Vec<f64> = Vec::new();
        for view in 0..q {
            let theta = 2.0 * std::f64::consts::PI * view as f64 / q as f64;
            let (sin, cos) = theta.sin_cos();
            let src = (source_dist * cos, source_dist * sin);
            let center = (-detector_dist * cos, -detector_dist * sin);
            // Detector axis, perpendicular to the source direction.
            let axis = (-sin, cos);
            for elem in 0..p {
                let offset = (elem as f64 + 0.5) * pitch - DETECTOR_SPAN_FACTOR * nf / 2.0;
                let dst = (center.0 + offset * axis.0, center.1 + offset * axis.1);
                let dir = (dst.0 - src.0, dst.1 - src.1);
                let len = (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
                let Some((t0, t1)) = clip_to_box(src, dir, half) else {
                    continue;
                };
                ts.clear();
                ts.push(t0);
                ts.push(t1);
                crossings(src.0, dir.0, half, t0, t1, &mut ts);
                crossings(src.1, dir.1, half, t0, t1, &mut ts);
                ts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                let row = view * p + elem;
                for pair in ts.windows(2) {
                    let (ta, tb) = (pair[0], pair[1]);
                    if tb - ta < MIN_SEGMENT {
                        continue;
                    }
                    let tm = 0.5 * (ta + tb);
                    let (mx, my) = (src.0 + tm * dir.0, src.1 + tm * dir.1);
                    let c = (mx + half).floor();
                    let r = (half - my).floor();
                    if c < 0.0 || r < 0.0 {
                        continue;
                    }
                    let (c, r) = (c as usize, r as usize);
                    if c >= n || r >= n {
                        continue;
                    }
                    triplets.push((row, c * n + r, (tb - ta) * len));
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(p * q, n * n, triplets);
        Ok(FanBeamProjector { n, p, q, matrix })
    }

    pub fn image_side(&self) -> usize {
        self.n
    }

    pub fn detector_count(&self) -> usize {
        self.p
    }

    pub fn view_count(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }
}

/// Parametric entry and exit of the ray `s + t dir` through the square
/// `[-half, half]^2`, restricted to the segment `t` in `[0, 1]`.
fn clip_to_box(s: (f64, f64), dir: (f64, f64), half: f64) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (pos, vel) in [(s.0, dir.0), (s.1, dir.1)] {
        if vel == 0.0 {
            if pos < -half || pos > half {
                return None;
            }
            continue;
        }
        let (mut a, mut b) = ((-half - pos) / vel, (half - pos) / vel);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t0 = t0.max(a);
        t1 = t1.min(b);
        if t0 >= t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Pushes the ray parameters of all grid-line crossings of one axis that
/// fall strictly inside `(t0, t1)`.
fn crossings(pos: f64, vel: f64, half: f64, t0: f64, t1: f64, ts: &mut Vec<f64>) {
    if vel == 0.0 {
        return;
    }
    let n = (2.0 * half) as usize;
    for line in 0..=n {
        let coord = line as f64 - half;
        let t = (coord - pos) / vel;
        if t > t0 && t < t1 {
            ts.push(t);
        }
    }
}

impl LinearOperator for FanBeamProjector {
    fn nrows(&self) -> usize {
        self.p * self.q
    }

    fn ncols(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y);
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.matrix.matvec_t(y, x);
    }

    fn to_dense(&self) -> Array2<f64> {
        assert!(self.ncols() <= super::MAX_DENSE_DIM);
        self.matrix.to_dense()
    }

    fn gram_dense(&self) -> Array2<f64> {
        self.matrix.gram_dense()
    }
}
