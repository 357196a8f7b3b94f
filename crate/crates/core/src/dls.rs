//! The alternating dictionary-learning surface solver.
//!
//! Alternates between (a) block-coordinate sweeps of the dictionary/code pair
//! on patches of the current surface and (b) proximal-gradient steps on the
//! surface, whose prox reduces to a diagonal solve because the stacked patch
//! operators satisfy `sum_j P_j' P_j = diag(coverage)`.

use crate::dictlearn::{
    soup_dil_sweep_with, AtomReset, Dictionary, SparseCodes,
};
use crate::error::{Error, Result};
use crate::field::{GradientField, PatchConfig, SurfaceGrid};
use crate::integrate::{integrate_dct, ls_gradient, ls_objective};
use crate::patches::{
    accumulate_patches, coverage_counts, dct_dictionary, extract_patches, patch_indices,
};
use crate::scalar::Real;

/// Hyperparameters of the joint objective and its solver loop.
#[derive(Debug, Clone)]
pub struct DlsConfig<S> {
    /// Weight of the patch-fit regularizer.
    pub lambda: S,
    /// Sparse-coding hard threshold.
    pub mu: S,
    /// Infinity-norm bound on code entries (inactive in practice).
    pub bound_a: S,
    /// Proximal-gradient step size; the default 1/8 matches the spectral
    /// bound of the difference operator.
    pub tau: S,
    pub outer_iters: usize,
    pub prox_steps_per_outer: usize,
    /// Dictionary/code sweeps per outer iteration.
    pub sweeps_per_outer: usize,
    /// Stop when the relative surface change drops below this.
    pub rel_tol: S,
    pub patch: PatchConfig,
    pub natoms: usize,
    pub seed: u64,
    /// Permit tau > 1/8; descent is no longer guaranteed.
    pub allow_large_tau: bool,
    /// Re-initialize degenerate atoms from the seeded generator instead of
    /// the DC atom.
    pub random_atom_reset: bool,
}

impl<S: Real> Default for DlsConfig<S> {
    fn default() -> Self {
        DlsConfig {
            lambda: S::of(0.1),
            mu: S::of(0.01),
            bound_a: S::of(1e6),
            tau: S::of(0.125),
            outer_iters: 30,
            prox_steps_per_outer: 5,
            sweeps_per_outer: 1,
            rel_tol: S::of(1e-6),
            patch: PatchConfig::default(),
            natoms: 64,
            seed: 0,
            allow_large_tau: false,
            random_atom_reset: false,
        }
    }
}

impl<S: Real> DlsConfig<S> {
    pub fn validate(&self) -> Result<()> {
        self.patch.validate()?;
        for (name, v) in [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("bound_a", self.bound_a),
            ("tau", self.tau),
        ] {
            if !(v > S::zero() && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.rel_tol < S::zero() {
            return Err(Error::InvalidConfig("rel_tol must be nonnegative".into()));
        }
        if self.tau > S::of(0.125) && !self.allow_large_tau {
            return Err(Error::InvalidConfig(format!(
                "tau {} exceeds the descent-safe bound 1/8; set allow_large_tau to override",
                self.tau
            )));
        }
        if self.outer_iters == 0 || self.prox_steps_per_outer == 0 || self.sweeps_per_outer == 0
        {
            return Err(Error::InvalidConfig(
                "iteration counts must be positive".into(),
            ));
        }
        if self.natoms == 0 || self.natoms > self.patch.patch_dim() {
            return Err(Error::InvalidConfig(format!(
                "natoms {} not in 1..={}",
                self.natoms,
                self.patch.patch_dim()
            )));
        }
        Ok(())
    }

    fn atom_reset(&self) -> AtomReset {
        if self.random_atom_reset {
            AtomReset::Seeded(self.seed)
        } else {
            AtomReset::Dc
        }
    }
}

/// One record per outer iteration.
#[derive(Debug, Clone, Copy)]
pub struct DlsTraceRow<S> {
    pub outer: usize,
    /// Full joint objective.
    pub total: S,
    /// Least-squares data term.
    pub data_term: S,
    /// Unweighted patch misfit `sum_j ||P_j z - D b_j||^2`.
    pub patch_fit: S,
    /// Nonzero code entries.
    pub l0_count: usize,
    /// Relative Frobenius change of the surface over this iteration
    /// (0 for the initial row).
    pub rel_change: S,
}

/// Objective trajectory of a solver run.
#[derive(Debug, Clone)]
pub struct DlsTrace<S> {
    pub rows: Vec<DlsTraceRow<S>>,
}

impl<S> Default for DlsTrace<S> {
    fn default() -> Self {
        DlsTrace { rows: Vec::new() }
    }
}

/// Everything a reconstruction run produces.
#[derive(Debug, Clone)]
pub struct DlsOutput<S> {
    pub surface: SurfaceGrid<S>,
    pub dictionary: Dictionary<S>,
    pub codes: SparseCodes<S>,
    pub trace: DlsTrace<S>,
}

/// The joint objective
/// `0.5 ||A z - v||^2 + lambda (sum_j ||P_j z - D b_j||^2 + mu^2 ||B||_0)`.
pub fn objective_eq5<S: Real>(
    z: &SurfaceGrid<S>,
    g: &GradientField<S>,
    dictionary: &Dictionary<S>,
    codes: &SparseCodes<S>,
    cfg: &DlsConfig<S>,
) -> Result<S> {
    let data = ls_objective(z, g)?;
    let (fit, l0) = patch_terms(z, dictionary, codes, cfg)?;
    Ok(data + cfg.lambda * (fit + cfg.mu * cfg.mu * S::from_usize(l0).unwrap()))
}

fn patch_terms<S: Real>(
    z: &SurfaceGrid<S>,
    dictionary: &Dictionary<S>,
    codes: &SparseCodes<S>,
    cfg: &DlsConfig<S>,
) -> Result<(S, usize)> {
    let patches = extract_patches(z, &cfg.patch)?;
    if codes.count() != patches.count() {
        return Err(Error::InvalidConfig(format!(
            "codes cover {} patches but the grid yields {}",
            codes.count(),
            patches.count()
        )));
    }
    let recon = dictionary.reconstruct(codes)?;
    let mut fit = S::zero();
    for (a, b) in patches.data().iter().zip(recon.data()) {
        let d = *a - *b;
        fit += d * d;
    }
    Ok((fit, codes.nnz()))
}

/// One proximal-gradient step on the surface: a gradient step on the data
/// term followed by the closed-form diagonal prox of the patch-fit term.
pub fn z_prox_step<S: Real>(
    z: &SurfaceGrid<S>,
    g: &GradientField<S>,
    dictionary: &Dictionary<S>,
    codes: &SparseCodes<S>,
    cfg: &DlsConfig<S>,
) -> Result<SurfaceGrid<S>> {
    cfg.validate()?;
    let (m, n) = z.dims();
    let recon = dictionary.reconstruct(codes)?;
    let consensus = accumulate_patches(&recon, &cfg.patch, m, n)?;
    let coverage = coverage_counts(&cfg.patch, m, n)?;
    prox_step_cached(z, g, &consensus, &coverage, cfg)
}

/// The prox step with the z-independent pieces (`sum_j P_j' D b_j` and the
/// coverage diagonal) precomputed by the caller.
fn prox_step_cached<S: Real>(
    z: &SurfaceGrid<S>,
    g: &GradientField<S>,
    consensus: &SurfaceGrid<S>,
    coverage: &SurfaceGrid<S>,
    cfg: &DlsConfig<S>,
) -> Result<SurfaceGrid<S>> {
    if z.dims() != g.dims() {
        return Err(Error::dim_mismatch(z.dims(), g.dims()));
    }
    let grad = ls_gradient(z, g)?;
    let two_tau_lambda = S::of(2.0) * cfg.tau * cfg.lambda;
    let (m, n) = z.dims();
    let mut out = SurfaceGrid::zeros(m, n);
    let zv = z.values();
    let gv = grad.values();
    let cv = consensus.values();
    let kv = coverage.values();
    for (k, o) in out.values_mut().iter_mut().enumerate() {
        let z_tilde = zv[k] - cfg.tau * gv[k];
        *o = (z_tilde + two_tau_lambda * cv[k]) / (S::one() + two_tau_lambda * kv[k]);
    }
    Ok(out)
}

/// Full alternating reconstruction from a gradient field.
///
/// The surface starts at the stand-alone least-squares solution, the
/// dictionary at the DCT basis, and the codes at zero. Each outer iteration
/// runs the configured number of dictionary sweeps on patches of the current
/// surface, then the configured number of proximal steps on the surface. The
/// run stops early once the relative surface change drops below `rel_tol`.
/// The returned surface is anchored to zero mean.
pub fn dls_reconstruct<S: Real>(g: &GradientField<S>, cfg: &DlsConfig<S>) -> Result<DlsOutput<S>> {
    cfg.validate()?;
    let (m, n) = g.dims();
    // fail fast if the grid does not admit a patch
    let patch_count = patch_indices(m, n, &cfg.patch)?.len();

    let mut z = integrate_dct(g)?;
    let mut dict = dct_dictionary::<S>(cfg.patch.patch_h, cfg.patch.patch_w, cfg.natoms)?;
    let mut codes = SparseCodes::zeros(cfg.natoms, patch_count, cfg.bound_a)?;
    let coverage = coverage_counts(&cfg.patch, m, n)?;

    let mut trace = DlsTrace::default();
    push_trace(&mut trace, 0, &z, g, &dict, &codes, cfg, S::zero())?;

    for outer in 1..=cfg.outer_iters {
        let z_prev = z.clone();

        let patches = extract_patches(&z, &cfg.patch)?;
        for _ in 0..cfg.sweeps_per_outer {
            let (d_next, b_next, _stats) =
                soup_dil_sweep_with(&patches, &dict, &codes, cfg.mu, cfg.atom_reset())?;
            dict = d_next;
            codes = b_next;
        }

        let recon = dict.reconstruct(&codes)?;
        let consensus = accumulate_patches(&recon, &cfg.patch, m, n)?;
        for _ in 0..cfg.prox_steps_per_outer {
            z = prox_step_cached(&z, g, &consensus, &coverage, cfg)?;
        }

        let denom = z_prev.norm().max(S::of(1e-30));
        let mut diff = S::zero();
        for (a, b) in z.values().iter().zip(z_prev.values()) {
            let d = *a - *b;
            diff += d * d;
        }
        let rel_change = diff.sqrt() / denom;
        push_trace(&mut trace, outer, &z, g, &dict, &codes, cfg, rel_change)?;
        if rel_change < cfg.rel_tol {
            break;
        }
    }

    Ok(DlsOutput {
        surface: z.anchored_zero_mean(),
        dictionary: dict,
        codes,
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn push_trace<S: Real>(
    trace: &mut DlsTrace<S>,
    outer: usize,
    z: &SurfaceGrid<S>,
    g: &GradientField<S>,
    dict: &Dictionary<S>,
    codes: &SparseCodes<S>,
    cfg: &DlsConfig<S>,
    rel_change: S,
) -> Result<()> {
    let data_term = ls_objective(z, g)?;
    let (patch_fit, l0_count) = patch_terms(z, dict, codes, cfg)?;
    let total =
        data_term + cfg.lambda * (patch_fit + cfg.mu * cfg.mu * S::from_usize(l0_count).unwrap());
    trace.rows.push(DlsTraceRow {
        outer,
        total,
        data_term,
        patch_fit,
        l0_count,
        rel_change,
    });
    Ok(())
}
