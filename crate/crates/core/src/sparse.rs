//! Compressed sparse row storage for the ray-driven projection matrix.
//!
//! Only the handful of operations the sampler needs are implemented:
//! construction from triplets, products with a vector and its adjoint,
//! densification for small problems and a dense Gram matrix.

use ndarray::Array2;

/// Sparse matrix in compressed sparse row format.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    /// Row pointers, `indptr[r]..indptr[r+1]` indexes row `r`'s entries.
    indptr: Vec<usize>,
    /// Column index of each stored entry, ascending within a row.
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicate
    /// positions are summed; explicit zeros are kept so deterministic
    /// builders produce identical storage run to run.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if indptr[r + 1] > indptr[r] && *indices.last().unwrap() == c && indptr[r + 1] == indices.len() {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] = indices.len();
            }
        }
        // Turn per-row end marks into cumulative pointers.
        for r in 0..nrows {
            if indptr[r + 1] < indptr[r] {
                indptr[r + 1] = indptr[r];
            }
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// The stored entries of row `r` as parallel `(columns, values)` slices.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.data[span])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }

    /// `y = A' x`.
    pub fn matvec_t(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let xr = x[r];
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xr;
            }
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[[r, c]] = v;
            }
        }
        out
    }

    /// Dense `A' A`, accumulated row by row; cheap because projection
    /// rows only touch the pixels along one ray.
    pub fn gram_dense(&self) -> Array2<f64> {
        let n = self.ncols;
        let mut g = Array2::<f64>::zeros((n, n));
        {
            let gs = g.as_slice_mut().unwrap();
            for r in 0..self.nrows {
                let (cols, vals) = self.row(r);
                for (&ci, &vi) in cols.iter().zip(vals) {
                    let base = ci * n;
                    for (&cj, &vj) in cols.iter().zip(vals) {
                        gs[base + cj] += vi * vj;
                    }
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    fn sample() -> CsrMatrix {
        // [[1, 0, 2], [0, 3, 0]] with a duplicate triplet on (0, 2).
        CsrMatrix::from_triplets(
            2,
            3,
            vec![(0, 2, 1.5), (1, 1, 3.0), (0, 0, 1.0), (0, 2, 0.5)],
        )
    }

    #[test]
    fn triplets_sort_and_merge() {
        let a = sample();
        assert_eq!(a.nnz(), 3);
        let dense = a.to_dense();
        let expect = arr2(&[[1.0, 0.0, 2.0], [0.0, 3.0, 0.0]]);
        assert_eq!(dense, expect);
    }

    #[test]
    fn matvec_and_adjoint_match_dense() {
        let a = sample();
        let dense = a.to_dense();
        let x = [1.0, -2.0, 0.5];
        let mut y = [0.0; 2];
        a.matvec(&x, &mut y);
        for r in 0..2 {
            let expect: f64 = (0..3).map(|c| dense[[r, c]] * x[c]).sum();
            assert_abs_diff_eq!(y[r], expect, epsilon = 1e-15);
        }
        let z = [2.0, -1.0];
        let mut w = [0.0; 3];
        a.matvec_t(&z, &mut w);
        for c in 0..3 {
            let expect: f64 = (0..2).map(|r| dense[[r, c]] * z[r]).sum();
            assert_abs_diff_eq!(w[c], expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn gram_matches_dense_product() {
        let a = sample();
        let dense = a.to_dense();
        let g = a.gram_dense();
        let expect = dense.t().dot(&dense);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(g[[i, j]], expect[[i, j]], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn empty_rows_are_fine() {
        let a = CsrMatrix::from_triplets(3, 2, vec![(2, 1, 4.0)]);
        let mut y = [0.0; 3];
        a.matvec(&[1.0, 1.0], &mut y);
        assert_eq!(y, [0.0, 0.0, 4.0]);
    }
}
