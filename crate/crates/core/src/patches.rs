//! Overlapping patch extraction operators, their adjoints, and the DCT
//! dictionary initializer.
//!
//! Patches are vectorized column-major internally, matching the crate-wide
//! Fortran `vec()` convention; the dictionary atoms use the same layout.

use crate::dct::DctPlan;
use crate::dictlearn::Dictionary;
use crate::error::{Error, Result};
use crate::field::{PatchConfig, SurfaceGrid};
use crate::scalar::Real;

/// A dense matrix whose j-th column is the vectorized j-th patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix<S> {
    patch_dim: usize,
    count: usize,
    /// Column-major, `patch_dim x count`.
    data: Vec<S>,
}

impl<S: Real> PatchMatrix<S> {
    pub fn zeros(patch_dim: usize, count: usize) -> Self {
        PatchMatrix {
            patch_dim,
            count,
            data: vec![S::zero(); patch_dim * count],
        }
    }

    pub fn patch_dim(&self) -> usize {
        self.patch_dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[S] {
        &self.data[j * self.patch_dim..(j + 1) * self.patch_dim]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [S] {
        &mut self.data[j * self.patch_dim..(j + 1) * self.patch_dim]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn frob_norm_sq(&self) -> S {
        self.data.iter().fold(S::zero(), |a, &b| a + b * b)
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(S::zero(), |a, (&u, &v)| a + u * v)
    }
}

/// Patch origins for a grid: aligned multiples of the stride per axis, plus a
/// final clamped origin so the last rows/columns are covered. Lexicographic
/// order, no duplicates.
pub fn patch_indices(
    rows: usize,
    cols: usize,
    cfg: &PatchConfig,
) -> Result<Vec<(usize, usize)>> {
    cfg.validate()?;
    if rows < cfg.patch_h || cols < cfg.patch_w {
        return Err(Error::PatchTooLarge {
            rows,
            cols,
            patch_h: cfg.patch_h,
            patch_w: cfg.patch_w,
        });
    }
    let row_origins = axis_origins(rows, cfg.patch_h, cfg.stride, cfg.clamp_boundary);
    let col_origins = axis_origins(cols, cfg.patch_w, cfg.stride, cfg.clamp_boundary);
    let mut out = Vec::with_capacity(row_origins.len() * col_origins.len());
    for &r in &row_origins {
        for &c in &col_origins {
            out.push((r, c));
        }
    }
    Ok(out)
}

fn axis_origins(dim: usize, patch: usize, stride: usize, clamp: bool) -> Vec<usize> {
    let last = dim - patch;
    let mut origins: Vec<usize> = (0..=last).step_by(stride).collect();
    if clamp && *origins.last().unwrap() != last {
        origins.push(last);
    }
    origins
}

/// Extracts every patch of `z` into a matrix, one column per patch.
pub fn extract_patches<S: Real>(z: &SurfaceGrid<S>, cfg: &PatchConfig) -> Result<PatchMatrix<S>> {
    let (rows, cols) = z.dims();
    let origins = patch_indices(rows, cols, cfg)?;
    let mut pm = PatchMatrix::zeros(cfg.patch_dim(), origins.len());
    for (j, &(r0, c0)) in origins.iter().enumerate() {
        let col = pm.column_mut(j);
        let mut k = 0;
        for pc in 0..cfg.patch_w {
            for pr in 0..cfg.patch_h {
                col[k] = z.get(r0 + pr, c0 + pc);
                k += 1;
            }
        }
    }
    Ok(pm)
}

/// Adjoint of [`extract_patches`]: scatter-adds every column back into its
/// origin, producing `sum_j P_j' (column j)`.
pub fn accumulate_patches<S: Real>(
    pm: &PatchMatrix<S>,
    cfg: &PatchConfig,
    rows: usize,
    cols: usize,
) -> Result<SurfaceGrid<S>> {
    let origins = patch_indices(rows, cols, cfg)?;
    if pm.count() != origins.len() || pm.patch_dim() != cfg.patch_dim() {
        return Err(Error::InvalidConfig(format!(
            "patch matrix {}x{} inconsistent with config ({} patches of dim {})",
            pm.patch_dim(),
            pm.count(),
            origins.len(),
            cfg.patch_dim()
        )));
    }
    let mut out = SurfaceGrid::zeros(rows, cols);
    for (j, &(r0, c0)) in origins.iter().enumerate() {
        let col = pm.column(j);
        let mut k = 0;
        for pc in 0..cfg.patch_w {
            for pr in 0..cfg.patch_h {
                let v = out.get(r0 + pr, c0 + pc) + col[k];
                out.set(r0 + pr, c0 + pc, v);
                k += 1;
            }
        }
    }
    Ok(out)
}

/// Number of patches covering each pixel: the diagonal of
/// `sum_j P_j' P_j`, integer-valued.
pub fn coverage_counts<S: Real>(
    cfg: &PatchConfig,
    rows: usize,
    cols: usize,
) -> Result<SurfaceGrid<S>> {
    // scatter-add of all-ones patches
    let count = patch_indices(rows, cols, cfg)?.len();
    let pm = PatchMatrix {
        patch_dim: cfg.patch_dim(),
        count,
        data: vec![S::one(); cfg.patch_dim() * count],
    };
    accumulate_patches(&pm, cfg, rows, cols)
}

/// The 2-D separable orthonormal DCT-II basis as dictionary atoms, vectorized
/// to match the patch layout. For `k < patch_h * patch_w` the atoms are taken
/// in column-major frequency order, so atom 0 is the constant (DC) atom.
pub fn dct_dictionary<S: Real>(patch_h: usize, patch_w: usize, natoms: usize) -> Result<Dictionary<S>> {
    if patch_h == 0 || patch_w == 0 {
        return Err(Error::InvalidConfig("patch dimensions must be positive".into()));
    }
    let full = patch_h * patch_w;
    if natoms == 0 || natoms > full {
        return Err(Error::InvalidConfig(format!(
            "dictionary size {natoms} not in 1..={full} (overcomplete initialization unsupported)"
        )));
    }
    let row_basis = DctPlan::<S>::new(patch_h);
    let col_basis = DctPlan::<S>::new(patch_w);
    let mut atoms = vec![S::zero(); full * natoms];
    for t in 0..natoms {
        let u = t % patch_h; // row frequency
        let v = t / patch_h; // column frequency
        let col = &mut atoms[t * full..(t + 1) * full];
        let mut k = 0;
        for pc in 0..patch_w {
            for pr in 0..patch_h {
                col[k] = row_basis.basis_value(u, pr) * col_basis.basis_value(v, pc);
                k += 1;
            }
        }
    }
    Dictionary::new(full, natoms, atoms)
}
