//! Grid-valued data types shared by every solver module.
//!
//! Conventions fixed here and relied on everywhere else:
//! - grid spacing is 1 in both axes; heights and gradients are per-pixel;
//! - row index increases with y, column index with x;
//! - storage is row-major; the vectorization `vec()` used by the difference
//!   operator stacks columns (Fortran order).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default lower bound on the z-component of a usable normal vector.
pub const NZ_MIN_DEFAULT: f64 = 1e-6;

/// An m x n height map.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid<S> {
    rows: usize,
    cols: usize,
    values: Vec<S>,
}

impl<S: Real> SurfaceGrid<S> {
    /// Builds a grid from row-major values, rejecting NaN/Inf entries.
    pub fn new(rows: usize, cols: usize, values: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::GridTooSmall {
                rows,
                cols,
                min_rows: 1,
                min_cols: 1,
            });
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "expected {} values for a {rows}x{cols} grid, got {}",
                rows * cols,
                values.len()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "surface grid",
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(SurfaceGrid { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SurfaceGrid {
            rows,
            cols,
            values: vec![S::zero(); rows * cols],
        }
    }

    /// Builds a grid by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        SurfaceGrid { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> S {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: S) {
        self.values[row * self.cols + col] = v;
    }

    /// Row-major backing slice.
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn mean(&self) -> S {
        let sum = self.values.iter().fold(S::zero(), |a, &b| a + b);
        sum / S::from_usize(self.values.len()).unwrap()
    }

    /// Subtracts the mean, anchoring the integration constant at zero.
    pub fn anchored_zero_mean(&self) -> Self {
        let m = self.mean();
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v -= m;
        }
        out
    }

    pub fn norm(&self) -> S {
        self.values
            .iter()
            .fold(S::zero(), |a, &b| a + b * b)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        debug_assert_eq!(self.dims(), other.dims());
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn min_max(&self) -> (S, S) {
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Paired per-pixel target derivatives (p, q data).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField<S> {
    pub gx: SurfaceGrid<S>,
    pub gy: SurfaceGrid<S>,
}

impl<S: Real> GradientField<S> {
    pub fn new(gx: SurfaceGrid<S>, gy: SurfaceGrid<S>) -> Result<Self> {
        if gx.dims() != gy.dims() {
            return Err(Error::dim_mismatch(gx.dims(), gy.dims()));
        }
        Ok(GradientField { gx, gy })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        GradientField {
            gx: SurfaceGrid::zeros(rows, cols),
            gy: SurfaceGrid::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.gx.rows()
    }

    pub fn cols(&self) -> usize {
        self.gx.cols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.gx.dims()
    }

    /// Frobenius norm of the stacked (gx, gy) vector.
    pub fn norm(&self) -> S {
        let sx = self.gx.values().iter().fold(S::zero(), |a, &b| a + b * b);
        let sy = self.gy.values().iter().fold(S::zero(), |a, &b| a + b * b);
        (sx + sy).sqrt()
    }

    /// Inner product of the stacked vectors.
    pub fn dot(&self, other: &Self) -> S {
        let dx = self
            .gx
            .values()
            .iter()
            .zip(other.gx.values())
            .fold(S::zero(), |a, (&u, &v)| a + u * v);
        let dy = self
            .gy
            .values()
            .iter()
            .zip(other.gy.values())
            .fold(S::zero(), |a, (&u, &v)| a + u * v);
        dx + dy
    }
}

/// Per-pixel unit surface normals with a mask for unusable pixels.
#[derive(Debug, Clone)]
pub struct NormalMap<S> {
    rows: usize,
    cols: usize,
    /// (n1, n2, n3) per pixel, row-major.
    vectors: Vec<[S; 3]>,
    degenerate: Vec<bool>,
}

impl<S: Real> NormalMap<S> {
    /// Builds a normal map from possibly unnormalized vectors.
    ///
    /// Vectors are normalized in place; a pixel is marked degenerate when its
    /// vector is numerically zero or its normalized z-component falls below
    /// `nz_min`, and the default normal (0, 0, 1) is stored there.
    pub fn new(rows: usize, cols: usize, vectors: Vec<[S; 3]>, nz_min: S) -> Result<Self> {
        if vectors.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "expected {} normals for a {rows}x{cols} map, got {}",
                rows * cols,
                vectors.len()
            )));
        }
        let mut out = Vec::with_capacity(vectors.len());
        let mut degenerate = Vec::with_capacity(vectors.len());
        for (k, v) in vectors.into_iter().enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite {
                    what: "normal map",
                    row: k / cols,
                    col: k % cols,
                });
            }
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm <= S::of(1e-12) {
                out.push([S::zero(), S::zero(), S::one()]);
                degenerate.push(true);
                continue;
            }
            let n = [v[0] / norm, v[1] / norm, v[2] / norm];
            if n[2] < nz_min {
                out.push([S::zero(), S::zero(), S::one()]);
                degenerate.push(true);
            } else {
                out.push(n);
                degenerate.push(false);
            }
        }
        Ok(NormalMap {
            rows,
            cols,
            vectors: out,
            degenerate,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn normal(&self, row: usize, col: usize) -> [S; 3] {
        self.vectors[row * self.cols + col]
    }

    #[inline]
    pub fn is_degenerate(&self, row: usize, col: usize) -> bool {
        self.degenerate[row * self.cols + col]
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

/// Patch geometry for the overlapping-patch regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchConfig {
    pub patch_h: usize,
    pub patch_w: usize,
    pub stride: usize,
    /// Append a final clamped origin per axis so every pixel is covered.
    pub clamp_boundary: bool,
}

impl Default for PatchConfig {
    fn default() -> Self {
        PatchConfig {
            patch_h: 8,
            patch_w: 8,
            stride: 2,
            clamp_boundary: true,
        }
    }
}

impl PatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_h == 0 || self.patch_w == 0 || self.stride == 0 {
            return Err(Error::InvalidConfig(
                "patch dimensions and stride must be positive".into(),
            ));
        }
        // stride <= min(patch) keeps coverage hole-free under clamping.
        if self.stride > self.patch_h.min(self.patch_w) {
            return Err(Error::InvalidConfig(format!(
                "stride {} exceeds patch size {}x{}",
                self.stride, self.patch_h, self.patch_w
            )));
        }
        Ok(())
    }

    pub fn patch_dim(&self) -> usize {
        self.patch_h * self.patch_w
    }
}

/// Shapes that expose (rows, cols) dimensions.
pub trait Dims {
    fn grid_dims(&self) -> (usize, usize);
}

impl<S: Real> Dims for SurfaceGrid<S> {
    fn grid_dims(&self) -> (usize, usize) {
        self.dims()
    }
}

impl<S: Real> Dims for GradientField<S> {
    fn grid_dims(&self) -> (usize, usize) {
        self.dims()
    }
}

impl<S: Real> Dims for NormalMap<S> {
    fn grid_dims(&self) -> (usize, usize) {
        self.dims()
    }
}

/// True iff both values live on grids of exactly the same dimensions.
pub fn validate_dims(a: &impl Dims, b: &impl Dims) -> bool {
    a.grid_dims() == b.grid_dims()
}
