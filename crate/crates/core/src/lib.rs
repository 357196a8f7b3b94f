//! Surface reconstruction from noisy gradient fields.
//!
//! The crate integrates per-pixel gradient estimates (for example from
//! photometric stereo) into a height map. Two solvers are provided:
//!
//! - [`integrate_dct`]: plain least-squares integration, solved exactly by
//!   diagonalizing the normal equations with a cosine transform;
//! - [`dls_reconstruct`]: the same data term jointly minimized with an
//!   adaptive dictionary-learning regularizer that sparsely codes overlapping
//!   surface patches, which rejects gradient noise far better.
//!
//! Supporting modules supply patch operators, the block-coordinate dictionary
//! learner, a photometric-stereo front end, synthetic test surfaces with
//! analytic gradients, exact-ratio SNR noise injection, and SSIM/RMSE
//! evaluation.
//!
//! Everything is generic over the floating-point scalar via [`Real`];
//! concrete `f64`/`f32` aliases for the main types live at the crate root.
//!
//! ```
//! use gradshop_core::{add_noise_snr, dls_reconstruct, integrate_dct, make_surface,
//!                     ssim, DlsConfig, SsimConfig, SynthKind, SynthSpec};
//!
//! let spec = SynthSpec::new(SynthKind::Tent, 32, 32, 1.0)?;
//! let (truth, gradients) = make_surface(&spec);
//! let noisy = add_noise_snr(&gradients, 10.0, 0)?;
//!
//! let cfg = DlsConfig { lambda: 0.3, outer_iters: 8, ..DlsConfig::default() };
//! let dls = dls_reconstruct(&noisy, &cfg)?;
//! let dct = integrate_dct(&noisy)?;
//!
//! let reference = truth.anchored_zero_mean();
//! let ssim_cfg = SsimConfig::default();
//! let s_dls = ssim(&dls.surface, &reference, &ssim_cfg)?;
//! let s_dct = ssim(&dct, &reference, &ssim_cfg)?;
//! assert!(s_dls >= s_dct - 1e-3);
//! # Ok::<(), gradshop_core::Error>(())
//! ```

pub mod dct;
pub mod dictlearn;
pub mod dls;
pub mod error;
pub mod field;
pub mod integrate;
pub mod metrics;
pub mod patches;
pub mod photometric;
pub mod scalar;
pub mod synthdata;

pub use error::{Error, Result};
pub use scalar::Real;

pub use dictlearn::{
    patch_fit_objective, soup_dil_sweep, soup_dil_sweep_with, sparse_code_row, update_atom,
    AtomReset, DictLearnStats, Dictionary, SparseCodes,
};
pub use dls::{
    dls_reconstruct, objective_eq5, z_prox_step, DlsConfig, DlsOutput, DlsTrace, DlsTraceRow,
};
pub use field::{
    validate_dims, Dims, GradientField, NormalMap, PatchConfig, SurfaceGrid, NZ_MIN_DEFAULT,
};
pub use integrate::{
    apply_diff, apply_diff_adjoint, integrate_dct, ls_gradient, ls_objective, LsOperator,
};
pub use metrics::{rmse_aligned, ssim, DynamicRange, SsimConfig};
pub use patches::{
    accumulate_patches, coverage_counts, dct_dictionary, extract_patches, patch_indices,
    PatchMatrix,
};
pub use photometric::{
    estimate_normals, gradients_to_normals, normals_to_gradients, render_lambertian, ImageStack,
    LightingSet, SignConvention,
};
pub use synthdata::{add_image_noise_snr, add_noise_snr, make_surface, SynthKind, SynthSpec};

/// `f64` aliases for the main data types.
pub type SurfaceGrid64 = field::SurfaceGrid<f64>;
pub type GradientField64 = field::GradientField<f64>;
pub type NormalMap64 = field::NormalMap<f64>;
pub type Dictionary64 = dictlearn::Dictionary<f64>;
pub type SparseCodes64 = dictlearn::SparseCodes<f64>;
pub type DlsConfig64 = dls::DlsConfig<f64>;
pub type DlsOutput64 = dls::DlsOutput<f64>;

/// `f32` aliases for memory-constrained callers.
pub type SurfaceGrid32 = field::SurfaceGrid<f32>;
pub type GradientField32 = field::GradientField<f32>;
pub type NormalMap32 = field::NormalMap<f32>;
pub type Dictionary32 = dictlearn::Dictionary<f32>;
pub type SparseCodes32 = dictlearn::SparseCodes<f32>;
pub type DlsConfig32 = dls::DlsConfig<f32>;
pub type DlsOutput32 = dls::DlsOutput<f32>;
