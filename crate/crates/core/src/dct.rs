//! Orthonormal type-II/III discrete cosine transforms.
//!
//! Direct O(n^2) evaluation against a precomputed cosine table. That is fast
//! enough at the grid sizes this crate targets and keeps the transform exactly
//! deterministic; callers only rely on the normal-equation residual contract,
//! not on any particular fast-transform factorization.

use crate::scalar::Real;

/// Cosine table for one transform length.
///
/// `basis[k * n + i] = c_k * cos(pi * k * (2i + 1) / (2n))` with
/// `c_0 = sqrt(1/n)`, `c_k = sqrt(2/n)`: the rows are the orthonormal DCT-II
/// basis vectors.
pub struct DctPlan<S> {
    n: usize,
    basis: Vec<S>,
}

impl<S: Real> DctPlan<S> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut basis = vec![S::zero(); n * n];
        let nf = n as f64;
        for k in 0..n {
            let scale = if k == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            };
            for i in 0..n {
                let angle = std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf);
                basis[k * n + i] = S::of(scale * angle.cos());
            }
        }
        DctPlan { n, basis }
    }

    /// Transform length.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry (k, i) of the orthonormal DCT-II basis matrix.
    pub fn basis_value(&self, k: usize, i: usize) -> S {
        debug_assert!(k < self.n && i < self.n);
        self.basis[k * self.n + i]
    }

    /// Forward orthonormal DCT-II: `out[k] = sum_i basis[k,i] * x[i]`.
    pub fn forward(&self, x: &[S], out: &mut [S]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            let mut acc = S::zero();
            for (r, v) in row.iter().zip(x) {
                acc += *r * *v;
            }
            *o = acc;
        }
    }

    /// Inverse (DCT-III, the transpose): `out[i] = sum_k basis[k,i] * x[k]`.
    pub fn inverse(&self, x: &[S], out: &mut [S]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for v in out.iter_mut() {
            *v = S::zero();
        }
        for (k, &xk) in x.iter().enumerate() {
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            for (o, r) in out.iter_mut().zip(row) {
                *o += *r * xk;
            }
        }
    }

    /// Eigenvalue of the 1-D Neumann difference Laplacian for frequency k.
    pub fn laplacian_eigenvalue(n: usize, k: usize) -> S {
        let s = (std::f64::consts::PI * k as f64 / (2.0 * n as f64)).sin();
        S::of(4.0 * s * s)
    }
}

/// Applies the 2-D separable transform to a row-major `rows x cols` buffer.
pub fn dct2_forward<S: Real>(
    data: &mut [S],
    rows: usize,
    cols: usize,
    row_plan: &DctPlan<S>,
    col_plan: &DctPlan<S>,
) {
    debug_assert_eq!(row_plan.size(), cols);
    debug_assert_eq!(col_plan.size(), rows);
    transform_rows(data, rows, cols, row_plan, true);
    transform_cols(data, rows, cols, col_plan, true);
}

pub fn dct2_inverse<S: Real>(
    data: &mut [S],
    rows: usize,
    cols: usize,
    row_plan: &DctPlan<S>,
    col_plan: &DctPlan<S>,
) {
    transform_cols(data, rows, cols, col_plan, false);
    transform_rows(data, rows, cols, row_plan, false);
}

fn transform_rows<S: Real>(
    data: &mut [S],
    rows: usize,
    cols: usize,
    plan: &DctPlan<S>,
    forward: bool,
) {
    let mut tmp = vec![S::zero(); cols];
    for r in 0..rows {
        let row = &mut data[r * cols..(r + 1) * cols];
        if forward {
            plan.forward(row, &mut tmp);
        } else {
            plan.inverse(row, &mut tmp);
        }
        row.copy_from_slice(&tmp);
    }
}

fn transform_cols<S: Real>(
    data: &mut [S],
    rows: usize,
    cols: usize,
    plan: &DctPlan<S>,
    forward: bool,
) {
    let mut col = vec![S::zero(); rows];
    let mut tmp = vec![S::zero(); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = data[r * cols + c];
        }
        if forward {
            plan.forward(&col, &mut tmp);
        } else {
            plan.inverse(&col, &mut tmp);
        }
        for r in 0..rows {
            data[r * cols + c] = tmp[r];
        }
    }
}
