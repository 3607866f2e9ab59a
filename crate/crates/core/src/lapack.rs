//! Minimal bindings to the system LAPACK (OpenBLAS) plus the triangular
//! solves built on top of them.
//!
//! Only three routines are bound: `dpotrf` (Cholesky), `dsyrk` (Gram
//! matrix) and `dgeqrf` (QR without forming Q). Everything else in the
//! crate is plain Rust. All public wrappers take row-major `ndarray`
//! views; the row-major/column-major mismatch is absorbed by the usual
//! tricks (a row-major lower triangle is a column-major upper triangle,
//! and the Gram matrix is symmetric).

use ndarray::{Array2, ArrayView2};
use std::os::raw::{c_char, c_int};

use crate::{Error, Result};

#[link(name = "openblas")]
extern "C" {
    fn dpotrf_(uplo: *const c_char, n: *const c_int, a: *mut f64, lda: *const c_int, info: *mut c_int);
    fn dsyrk_(
        uplo: *const c_char,
        trans: *const c_char,
        n: *const c_int,
        k: *const c_int,
        alpha: *const f64,
        a: *const f64,
        lda: *const c_int,
        beta: *const f64,
        c: *mut f64,
        ldc: *const c_int,
    );
    fn dgeqrf_(
        m: *const c_int,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        tau: *mut f64,
        work: *mut f64,
        lwork: *const c_int,
        info: *mut c_int,
    );
}

/// In-place Cholesky factorization of a symmetric positive definite
/// matrix stored row-major.
///
/// On success the lower triangle of `a` holds the factor `G` with
/// `G G' = A`; the strict upper triangle is left untouched and must not
/// be read afterwards. Fails with [`Error::Numerical`] when a pivot is
/// not positive, which for the sampler means the assembled posterior
/// precision lost definiteness in floating point.
pub fn cholesky_lower_inplace(a: &mut Array2<f64>) -> Result<()> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dim("cholesky", n, a.ncols()));
    }
    let slice = a.as_slice_mut().expect("contiguous row-major matrix");
    let nn = n as c_int;
    let mut info: c_int = 0;
    // Row-major lower triangle == column-major upper triangle.
    unsafe { dpotrf_(&(b'U' as c_char), &nn, slice.as_mut_ptr(), &nn, &mut info) };
    if info < 0 {
        return Err(Error::Numerical(format!(
            "dpotrf: illegal argument {}",
            -info
        )));
    }
    if info > 0 {
        return Err(Error::Numerical(format!(
            "dpotrf: leading minor {} not positive definite",
            info
        )));
    }
    Ok(())
}

/// Gram matrix `A' A` of a row-major `m x n` matrix, returned dense and
/// fully symmetric.
pub fn gram(a: ArrayView2<'_, f64>) -> Array2<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let src = a.as_slice().expect("contiguous row-major matrix");
    let mut g = Array2::<f64>::zeros((n, n));
    {
        let gs = g.as_slice_mut().unwrap();
        let (nn, kk) = (n as c_int, m as c_int);
        let (one, zero) = (1.0f64, 0.0f64);
        // Row-major A viewed column-major is A'; dsyrk('N') then forms
        // A' (A')' = A' A in one triangle.
        unsafe {
            dsyrk_(
                &(b'U' as c_char),
                &(b'N' as c_char),
                &nn,
                &kk,
                &one,
                src.as_ptr(),
                &nn,
                &zero,
                gs.as_mut_ptr(),
                &nn,
            )
        };
    }
    // dsyrk's column-major upper triangle is the row-major lower
    // triangle of g; mirror it into the upper half.
    for i in 0..n {
        for j in 0..i {
            let v = g[[i, j]];
            g[[j, i]] = v;
        }
    }
    g
}

/// Upper-triangular factor `R` of the thin QR factorization of a
/// row-major `r x c` matrix (`r >= c`), with the orthogonal factor never
/// formed. Rows of `R` are sign-normalized so the diagonal is
/// nonnegative, making the factor unique and `R' R = A' A`.
pub fn qr_r_factor(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (r, c) = (a.nrows(), a.ncols());
    if r < c {
        return Err(Error::dim("qr_r_factor rows", c, r));
    }
    // dgeqrf wants column-major storage.
    let mut buf = vec![0.0f64; r * c];
    for i in 0..r {
        for j in 0..c {
            buf[i + j * r] = a[[i, j]];
        }
    }
    let (mm, nn) = (r as c_int, c as c_int);
    let mut tau = vec![0.0f64; c];
    let mut info: c_int = 0;
    // Workspace query, then the factorization itself.
    let mut wkopt = 0.0f64;
    let query: c_int = -1;
    unsafe {
        dgeqrf_(
            &mm,
            &nn,
            buf.as_mut_ptr(),
            &mm,
            tau.as_mut_ptr(),
            &mut wkopt,
            &query,
            &mut info,
        )
    };
    if info != 0 {
        return Err(Error::Numerical(format!("dgeqrf workspace query: {info}")));
    }
    let lwork = wkopt as c_int;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    unsafe {
        dgeqrf_(
            &mm,
            &nn,
            buf.as_mut_ptr(),
            &mm,
            tau.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        )
    };
    if info != 0 {
        return Err(Error::Numerical(format!("dgeqrf: illegal argument {}", -info)));
    }
    let mut rfac = Array2::<f64>::zeros((c, c));
    for i in 0..c {
        let flip = buf[i + i * r] < 0.0;
        for j in i..c {
            let v = buf[i + j * r];
            rfac[[i, j]] = if flip { -v } else { v };
        }
    }
    Ok(rfac)
}

/// Solve `G z = b` in place for lower-triangular `G` (forward
/// substitution, reading only the lower triangle).
pub fn solve_lower(g: &Array2<f64>, b: &mut [f64]) {
    let n = g.nrows();
    debug_assert_eq!(n, b.len());
    let gs = g.as_slice().expect("contiguous row-major matrix");
    for i in 0..n {
        let row = &gs[i * n..i * n + i];
        let dot: f64 = row.iter().zip(b[..i].iter()).map(|(a, x)| a * x).sum();
        b[i] = (b[i] - dot) / gs[i * n + i];
    }
}

/// Solve `G' z = b` in place for lower-triangular `G` (back substitution
/// in saxpy form so the accesses stay on contiguous rows of `G`).
pub fn solve_lower_transpose(g: &Array2<f64>, b: &mut [f64]) {
    let n = g.nrows();
    debug_assert_eq!(n, b.len());
    let gs = g.as_slice().expect("contiguous row-major matrix");
    for j in (0..n).rev() {
        let zj = b[j] / gs[j * n + j];
        b[j] = zj;
        let row = &gs[j * n..j * n + j];
        for (bi, gji) in b[..j].iter_mut().zip(row.iter()) {
            *bi -= gji * zj;
        }
    }
}

/// Solve `R z = b` in place for upper-triangular `R` (back substitution).
pub fn solve_upper(r: &Array2<f64>, b: &mut [f64]) {
    let n = r.nrows();
    debug_assert_eq!(n, b.len());
    let rs = r.as_slice().expect("contiguous row-major matrix");
    for i in (0..n).rev() {
        let row = &rs[i * n + i + 1..(i + 1) * n];
        let dot: f64 = row.iter().zip(b[i + 1..].iter()).map(|(a, x)| a * x).sum();
        b[i] = (b[i] - dot) / rs[i * n + i];
    }
}

/// Solve `R' z = b` in place for upper-triangular `R` (forward
/// substitution in saxpy form).
pub fn solve_upper_transpose(r: &Array2<f64>, b: &mut [f64]) {
    let n = r.nrows();
    debug_assert_eq!(n, b.len());
    let rs = r.as_slice().expect("contiguous row-major matrix");
    for j in 0..n {
        let zj = b[j] / rs[j * n + j];
        b[j] = zj;
        let row = &rs[j * n + j + 1..(j + 1) * n];
        for (bi, rji) in b[j + 1..].iter_mut().zip(row.iter()) {
            *bi -= rji * zj;
        }
    }
}
