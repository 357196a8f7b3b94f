//! Discrete least-squares integration of gradient fields.
//!
//! The forward-difference operator `A` stacks column differences (x) over row
//! differences (y), with the final difference per axis replicated as a zero
//! row so both components keep the grid's shape. The least-squares normal
//! equations `A'A z = A'v` are diagonalized by the 2-D DCT-II under Neumann
//! boundary conditions; the constant null-space direction is anchored to zero
//! mean.

use crate::dct::{dct2_forward, dct2_inverse, DctPlan};
use crate::error::{Error, Result};
use crate::field::{GradientField, SurfaceGrid};
use crate::scalar::Real;

/// The difference operator for a fixed grid size: forward differences with
/// the final difference row per axis replicated as zero, so both output
/// components keep the grid's shape. Bundles the free functions below for
/// callers that want the operator as a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LsOperator {
    rows: usize,
    cols: usize,
}

impl LsOperator {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::GridTooSmall {
                rows,
                cols,
                min_rows: 1,
                min_cols: 1,
            });
        }
        Ok(LsOperator { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn apply<S: Real>(&self, z: &SurfaceGrid<S>) -> Result<GradientField<S>> {
        self.check(z.dims())?;
        Ok(apply_diff(z))
    }

    pub fn apply_adjoint<S: Real>(&self, g: &GradientField<S>) -> Result<SurfaceGrid<S>> {
        self.check(g.dims())?;
        Ok(apply_diff_adjoint(g))
    }

    fn check(&self, dims: (usize, usize)) -> Result<()> {
        if dims != (self.rows, self.cols) {
            return Err(Error::dim_mismatch((self.rows, self.cols), dims));
        }
        Ok(())
    }
}

/// Forward differences of `z`: the x component differences across columns,
/// the y component across rows; the last column/row of each is zero.
pub fn apply_diff<S: Real>(z: &SurfaceGrid<S>) -> GradientField<S> {
    let (m, n) = z.dims();
    let mut gx = SurfaceGrid::zeros(m, n);
    let mut gy = SurfaceGrid::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            if j + 1 < n {
                gx.set(i, j, z.get(i, j + 1) - z.get(i, j));
            }
            if i + 1 < m {
                gy.set(i, j, z.get(i + 1, j) - z.get(i, j));
            }
        }
    }
    GradientField { gx, gy }
}

/// Adjoint of [`apply_diff`]: negative divergence with the matching boundary
/// convention. The zero rows of the operator ignore the last column of `gx`
/// and the last row of `gy`.
pub fn apply_diff_adjoint<S: Real>(g: &GradientField<S>) -> SurfaceGrid<S> {
    let (m, n) = g.dims();
    let mut out = SurfaceGrid::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let mut acc = S::zero();
            if j >= 1 {
                acc += g.gx.get(i, j - 1);
            }
            if j + 1 < n {
                acc -= g.gx.get(i, j);
            }
            if i >= 1 {
                acc += g.gy.get(i - 1, j);
            }
            if i + 1 < m {
                acc -= g.gy.get(i, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// The least-squares data term `0.5 * ||A z - v||^2` summed over both
/// gradient components.
pub fn ls_objective<S: Real>(z: &SurfaceGrid<S>, g: &GradientField<S>) -> Result<S> {
    if z.dims() != g.dims() {
        return Err(Error::dim_mismatch(z.dims(), g.dims()));
    }
    let r = residual(z, g);
    Ok(S::of(0.5) * r.dot(&r))
}

/// Gradient of the data term: `A'(A z - v)` reshaped to the grid.
pub fn ls_gradient<S: Real>(z: &SurfaceGrid<S>, g: &GradientField<S>) -> Result<SurfaceGrid<S>> {
    if z.dims() != g.dims() {
        return Err(Error::dim_mismatch(z.dims(), g.dims()));
    }
    Ok(apply_diff_adjoint(&residual(z, g)))
}

fn residual<S: Real>(z: &SurfaceGrid<S>, g: &GradientField<S>) -> GradientField<S> {
    let mut r = apply_diff(z);
    for (a, &b) in r.gx.values_mut().iter_mut().zip(g.gx.values()) {
        *a -= b;
    }
    for (a, &b) in r.gy.values_mut().iter_mut().zip(g.gy.values()) {
        *a -= b;
    }
    r
}

/// Solves `min_z ||A z - v||^2` by diagonalizing the normal equations with a
/// DCT-II and returns the zero-mean minimizer.
pub fn integrate_dct<S: Real>(g: &GradientField<S>) -> Result<SurfaceGrid<S>> {
    let (m, n) = g.dims();
    if m < 2 || n < 2 {
        return Err(Error::GridTooSmall {
            rows: m,
            cols: n,
            min_rows: 2,
            min_cols: 2,
        });
    }
    let rhs = apply_diff_adjoint(g);
    let row_plan = DctPlan::<S>::new(n);
    let col_plan = DctPlan::<S>::new(m);

    let mut spec = rhs.values().to_vec();
    dct2_forward(&mut spec, m, n, &row_plan, &col_plan);
    for u in 0..m {
        let lu = DctPlan::<S>::laplacian_eigenvalue(m, u);
        for v in 0..n {
            if u == 0 && v == 0 {
                // Constant mode: null space, anchored separately.
                spec[0] = S::zero();
                continue;
            }
            let lv = DctPlan::<S>::laplacian_eigenvalue(n, v);
            spec[u * n + v] /= lu + lv;
        }
    }
    dct2_inverse(&mut spec, m, n, &row_plan, &col_plan);

    let z = SurfaceGrid::new(m, n, spec)?;
    Ok(z.anchored_zero_mean())
}
