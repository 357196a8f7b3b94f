//! Block-coordinate dictionary learning for the patch-fit subproblem
//! `min ||P - D B||_F^2 + mu^2 ||B||_0` with unit-norm atoms and
//! infinity-bounded codes.
//!
//! One sweep visits the atoms in ascending index order and, for each atom,
//! exactly minimizes over the matching code row (hard threshold, then clip)
//! and then over the atom itself (normalized weighted residual). The residual
//! `P - D B` is maintained through rank-one updates, so a sweep touches only
//! the nonzero code entries plus one correlation pass per atom.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::patches::PatchMatrix;
use crate::scalar::Real;

/// Dictionary of unit-norm atoms, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<S> {
    atom_dim: usize,
    natoms: usize,
    /// Column-major, `atom_dim x natoms`.
    atoms: Vec<S>,
}

impl<S: Real> Dictionary<S> {
    /// Builds a dictionary, rejecting non-finite entries and columns whose
    /// norm strays from 1.
    pub fn new(atom_dim: usize, natoms: usize, atoms: Vec<S>) -> Result<Self> {
        if atoms.len() != atom_dim * natoms {
            return Err(Error::InvalidConfig(format!(
                "expected {} dictionary entries, got {}",
                atom_dim * natoms,
                atoms.len()
            )));
        }
        let d = Dictionary {
            atom_dim,
            natoms,
            atoms,
        };
        let tol = S::of(1e-10).max(S::epsilon() * S::of(8.0));
        for i in 0..natoms {
            let mut nrm = S::zero();
            for &v in d.atom(i) {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        what: "dictionary",
                        row: 0,
                        col: i,
                    });
                }
                nrm += v * v;
            }
            if (nrm.sqrt() - S::one()).abs() > tol {
                return Err(Error::InvalidConfig(format!(
                    "atom {i} has norm {} (must be unit)",
                    nrm.sqrt()
                )));
            }
        }
        Ok(d)
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn natoms(&self) -> usize {
        self.natoms
    }

    #[inline]
    pub fn atom(&self, i: usize) -> &[S] {
        &self.atoms[i * self.atom_dim..(i + 1) * self.atom_dim]
    }

    fn atom_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.atoms[i * self.atom_dim..(i + 1) * self.atom_dim]
    }

    /// Dense product `D B` as a patch matrix, skipping zero code entries.
    pub fn reconstruct(&self, codes: &SparseCodes<S>) -> Result<PatchMatrix<S>> {
        if codes.natoms() != self.natoms {
            return Err(Error::InvalidConfig(format!(
                "codes have {} rows but dictionary has {} atoms",
                codes.natoms(),
                self.natoms
            )));
        }
        let mut out = PatchMatrix::zeros(self.atom_dim, codes.count());
        for i in 0..self.natoms {
            let atom = self.atom(i);
            let row = codes.row(i);
            for (j, &beta) in row.iter().enumerate() {
                if beta != S::zero() {
                    let col = out.column_mut(j);
                    for (o, &a) in col.iter_mut().zip(atom) {
                        *o += beta * a;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Sparse coefficient matrix; row i holds the codes of atom i across patches.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodes<S> {
    natoms: usize,
    count: usize,
    /// Row-major, `natoms x count`.
    codes: Vec<S>,
    bound: S,
}

impl<S: Real> SparseCodes<S> {
    pub fn zeros(natoms: usize, count: usize, bound: S) -> Result<Self> {
        if bound <= S::zero() {
            return Err(Error::InvalidConfig("code bound must be positive".into()));
        }
        Ok(SparseCodes {
            natoms,
            count,
            codes: vec![S::zero(); natoms * count],
            bound,
        })
    }

    pub fn new(natoms: usize, count: usize, codes: Vec<S>, bound: S) -> Result<Self> {
        if codes.len() != natoms * count {
            return Err(Error::InvalidConfig(format!(
                "expected {} code entries, got {}",
                natoms * count,
                codes.len()
            )));
        }
        if bound <= S::zero() {
            return Err(Error::InvalidConfig("code bound must be positive".into()));
        }
        for (k, &v) in codes.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "sparse codes",
                    row: k / count,
                    col: k % count,
                });
            }
            if v.abs() > bound {
                return Err(Error::InvalidConfig(format!(
                    "code entry {v} exceeds bound {bound}"
                )));
            }
        }
        Ok(SparseCodes {
            natoms,
            count,
            codes,
            bound,
        })
    }

    pub fn natoms(&self) -> usize {
        self.natoms
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn bound(&self) -> S {
        self.bound
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.codes[i * self.count..(i + 1) * self.count]
    }

    fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.codes[i * self.count..(i + 1) * self.count]
    }

    pub fn nnz(&self) -> usize {
        self.codes.iter().filter(|&&v| v != S::zero()).count()
    }
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone)]
pub struct DictLearnStats<S> {
    /// `||P - D B||_F^2 + mu^2 ||B||_0` after the sweep.
    pub objective: S,
    /// Fraction of nonzero code entries.
    pub sparsity: f64,
    /// Degenerate atoms re-initialized during the sweep.
    pub atoms_reset: usize,
}

/// How a degenerate atom (nonzero row, vanishing weighted residual) is
/// re-initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum AtomReset {
    /// Constant DC atom; fully deterministic.
    #[default]
    Dc,
    /// Random unit atom from a generator seeded per reset event.
    Seeded(u64),
}


/// Exact minimizer of one code row: entries at or below the threshold in
/// magnitude are zeroed (ties zeroed), survivors are clipped to the bound.
pub fn sparse_code_row<S: Real>(correlations: &[S], mu: S, bound: S) -> Vec<S> {
    correlations
        .iter()
        .map(|&c| {
            if c.abs() <= mu {
                S::zero()
            } else {
                c.signum() * c.abs().min(bound)
            }
        })
        .collect()
}

/// Exact minimizer of one atom: the normalized weighted residual, or the
/// constant DC atom when the residual is numerically zero.
pub fn update_atom<S: Real>(weighted_residual: &[S]) -> Vec<S> {
    let nrm = weighted_residual
        .iter()
        .fold(S::zero(), |a, &b| a + b * b)
        .sqrt();
    if nrm > S::of(1e-12) {
        weighted_residual.iter().map(|&v| v / nrm).collect()
    } else {
        dc_atom(weighted_residual.len())
    }
}

fn dc_atom<S: Real>(dim: usize) -> Vec<S> {
    let v = S::one() / S::from_usize(dim).unwrap().sqrt();
    vec![v; dim]
}

/// One full block-coordinate sweep over all atom/row pairs with DC resets.
pub fn soup_dil_sweep<S: Real>(
    patches: &PatchMatrix<S>,
    dictionary: &Dictionary<S>,
    codes: &SparseCodes<S>,
    mu: S,
) -> Result<(Dictionary<S>, SparseCodes<S>, DictLearnStats<S>)> {
    soup_dil_sweep_with(patches, dictionary, codes, mu, AtomReset::Dc)
}

/// One full sweep with an explicit degenerate-atom policy.
pub fn soup_dil_sweep_with<S: Real>(
    patches: &PatchMatrix<S>,
    dictionary: &Dictionary<S>,
    codes: &SparseCodes<S>,
    mu: S,
    reset: AtomReset,
) -> Result<(Dictionary<S>, SparseCodes<S>, DictLearnStats<S>)> {
    if mu <= S::zero() {
        return Err(Error::InvalidConfig("mu must be positive".into()));
    }
    let dim = patches.patch_dim();
    let c = patches.count();
    let k_atoms = dictionary.natoms();
    if dictionary.atom_dim() != dim || codes.natoms() != k_atoms || codes.count() != c {
        return Err(Error::InvalidConfig(format!(
            "shape mismatch: patches {}x{}, dictionary {}x{}, codes {}x{}",
            dim,
            c,
            dictionary.atom_dim(),
            k_atoms,
            codes.natoms(),
            codes.count()
        )));
    }

    let mut dict = dictionary.clone();
    let mut b = codes.clone();
    let bound = b.bound();

    // residual R = P - D B, maintained incrementally
    let mut resid = patches.clone();
    for i in 0..k_atoms {
        let atom = dict.atom(i);
        let row = b.row(i);
        for (j, &beta) in row.iter().enumerate() {
            if beta != S::zero() {
                let col = resid.column_mut(j);
                for (r, &a) in col.iter_mut().zip(atom) {
                    *r -= beta * a;
                }
            }
        }
    }

    let mut atoms_reset = 0usize;
    let mut resets_seen = 0u64;
    let mut corr = vec![S::zero(); c];
    let mut weighted = vec![S::zero(); dim];

    for i in 0..k_atoms {
        // correlations E_i' d_i = R' d_i + b_i (unit atom)
        {
            let atom = dict.atom(i);
            let old_row = b.row(i);
            for j in 0..c {
                let col = resid.column(j);
                let mut acc = S::zero();
                for (r, &a) in col.iter().zip(atom) {
                    acc += *r * a;
                }
                corr[j] = acc + old_row[j];
            }
        }

        let new_row = sparse_code_row(&corr, mu, bound);

        // weighted residual E_i c_i = R c_i + d_i (b_i . c_i)
        let row_is_zero = new_row.iter().all(|&v| v == S::zero());
        if !row_is_zero {
            let atom = dict.atom(i);
            let old_row = b.row(i);
            let mut dot_old_new = S::zero();
            for (o, n) in old_row.iter().zip(new_row.iter()) {
                dot_old_new += *o * *n;
            }
            for w in weighted.iter_mut() {
                *w = S::zero();
            }
            for (j, &beta) in new_row.iter().enumerate() {
                if beta != S::zero() {
                    let col = resid.column(j);
                    for (w, &r) in weighted.iter_mut().zip(col) {
                        *w += beta * r;
                    }
                }
            }
            for (w, &a) in weighted.iter_mut().zip(atom) {
                *w += dot_old_new * a;
            }
        }

        let new_atom = if row_is_zero {
            // Any unit atom is optimal for a zero row; keeping the current one
            // leaves the dictionary untouched on empty data.
            dict.atom(i).to_vec()
        } else {
            let nrm = weighted.iter().fold(S::zero(), |a, &w| a + w * w).sqrt();
            if nrm > S::of(1e-12) {
                weighted.iter().map(|&w| w / nrm).collect()
            } else {
                atoms_reset += 1;
                resets_seen += 1;
                match reset {
                    AtomReset::Dc => dc_atom(dim),
                    AtomReset::Seeded(seed) => {
                        random_unit_atom(dim, seed, i as u64, resets_seen)
                    }
                }
            }
        };

        // R <- R + d_i b_i - d_new c_i, touching only nonzero columns
        {
            let old_atom = dict.atom(i).to_vec();
            let old_row = b.row(i).to_vec();
            for (j, &beta) in old_row.iter().enumerate() {
                if beta != S::zero() {
                    let col = resid.column_mut(j);
                    for (r, &a) in col.iter_mut().zip(&old_atom) {
                        *r += beta * a;
                    }
                }
            }
            for (j, &beta) in new_row.iter().enumerate() {
                if beta != S::zero() {
                    let col = resid.column_mut(j);
                    for (r, &a) in col.iter_mut().zip(&new_atom) {
                        *r -= beta * a;
                    }
                }
            }
        }

        dict.atom_mut(i).copy_from_slice(&new_atom);
        b.row_mut(i).copy_from_slice(&new_row);
    }

    let nnz = b.nnz();
    let objective = resid.frob_norm_sq() + mu * mu * S::from_usize(nnz).unwrap();
    let stats = DictLearnStats {
        objective,
        sparsity: nnz as f64 / (k_atoms * c) as f64,
        atoms_reset,
    };
    Ok((dict, b, stats))
}

fn random_unit_atom<S: Real>(dim: usize, seed: u64, atom: u64, event: u64) -> Vec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (atom << 32) ^ event);
    loop {
        let v: Vec<S> = (0..dim)
            .map(|_| S::of(rng.random_range(-1.0..1.0)))
            .collect();
        let nrm = v.iter().fold(S::zero(), |a, &b| a + b * b).sqrt();
        if nrm > S::of(1e-3) {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// Eq-style patch-fit objective `||P - D B||_F^2 + mu^2 ||B||_0`, computed
/// from scratch.
pub fn patch_fit_objective<S: Real>(
    patches: &PatchMatrix<S>,
    dictionary: &Dictionary<S>,
    codes: &SparseCodes<S>,
    mu: S,
) -> Result<S> {
    let recon = dictionary.reconstruct(codes)?;
    if recon.count() != patches.count() || recon.patch_dim() != patches.patch_dim() {
        return Err(Error::InvalidConfig(
            "codes/patches column mismatch".into(),
        ));
    }
    let mut fit = S::zero();
    for (a, b) in patches.data().iter().zip(recon.data()) {
        let d = *a - *b;
        fit += d * d;
    }
    Ok(fit + mu * mu * S::from_usize(codes.nnz()).unwrap())
}
