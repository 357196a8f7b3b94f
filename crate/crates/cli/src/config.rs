//! JSON run configuration mirroring the solver, patch, SSIM and sign
//! convention settings. Unknown keys are rejected; numeric constraints are
//! checked at parse time by validating the assembled core configs.

use serde::Deserialize;

use gradshop_core::{DlsConfig, DynamicRange, PatchConfig, SignConvention, SsimConfig};

use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dls,
    Dctls,
}

impl Method {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "dls" => Ok(Method::Dls),
            "dctls" => Ok(Method::Dctls),
            other => Err(CliError::usage(format!("unknown method \"{other}\""))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Dls => "dls",
            Method::Dctls => "dctls",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub method: String,
    pub lambda: f64,
    pub mu: f64,
    pub bound_a: f64,
    pub tau: f64,
    pub outer_iters: usize,
    pub prox_steps_per_outer: usize,
    pub sweeps_per_outer: usize,
    pub rel_tol: f64,
    pub natoms: usize,
    pub seed: u64,
    pub allow_large_tau: bool,
    pub random_atom_reset: bool,
    pub patch: PatchJson,
    pub ssim: SsimJson,
    pub convention: ConventionJson,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = DlsConfig::<f64>::default();
        RunConfig {
            method: "dls".into(),
            lambda: d.lambda,
            mu: d.mu,
            bound_a: d.bound_a,
            tau: d.tau,
            outer_iters: d.outer_iters,
            prox_steps_per_outer: d.prox_steps_per_outer,
            sweeps_per_outer: d.sweeps_per_outer,
            rel_tol: d.rel_tol,
            natoms: d.natoms,
            seed: d.seed,
            allow_large_tau: false,
            random_atom_reset: false,
            patch: PatchJson::default(),
            ssim: SsimJson::default(),
            convention: ConventionJson::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatchJson {
    pub patch_h: usize,
    pub patch_w: usize,
    pub stride: usize,
    pub clamp_boundary: bool,
}

impl Default for PatchJson {
    fn default() -> Self {
        let p = PatchConfig::default();
        PatchJson {
            patch_h: p.patch_h,
            patch_w: p.patch_w,
            stride: p.stride,
            clamp_boundary: p.clamp_boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsimJson {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: DynamicRangeJson,
}

impl Default for SsimJson {
    fn default() -> Self {
        let s = SsimConfig::<f64>::default();
        SsimJson {
            window: s.window,
            sigma: s.sigma,
            k1: s.k1,
            k2: s.k2,
            dynamic_range: DynamicRangeJson::Auto(AutoTag::Auto),
        }
    }
}

/// Either the literal string "auto" or a positive number.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum DynamicRangeJson {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConventionJson {
    pub flip_x: bool,
    pub flip_y: bool,
}

impl Default for ConventionJson {
    fn default() -> Self {
        let c = SignConvention::default();
        ConventionJson {
            flip_x: c.flip_x,
            flip_y: c.flip_y,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every embedded numeric constraint by building the core configs.
    pub fn validate(&self) -> CliResult<()> {
        Method::parse(&self.method)?;
        self.dls_config()
            .validate()
            .map_err(|e| CliError::usage(format!("config: {e}")))?;
        self.ssim_config()
            .validate()
            .map_err(|e| CliError::usage(format!("config: {e}")))?;
        Ok(())
    }

    pub fn method(&self) -> CliResult<Method> {
        Method::parse(&self.method)
    }

    pub fn patch_config(&self) -> PatchConfig {
        PatchConfig {
            patch_h: self.patch.patch_h,
            patch_w: self.patch.patch_w,
            stride: self.patch.stride,
            clamp_boundary: self.patch.clamp_boundary,
        }
    }

    pub fn dls_config(&self) -> DlsConfig<f64> {
        DlsConfig {
            lambda: self.lambda,
            mu: self.mu,
            bound_a: self.bound_a,
            tau: self.tau,
            outer_iters: self.outer_iters,
            prox_steps_per_outer: self.prox_steps_per_outer,
            sweeps_per_outer: self.sweeps_per_outer,
            rel_tol: self.rel_tol,
            patch: self.patch_config(),
            natoms: self.natoms,
            seed: self.seed,
            allow_large_tau: self.allow_large_tau,
            random_atom_reset: self.random_atom_reset,
        }
    }

    pub fn ssim_config(&self) -> SsimConfig<f64> {
        SsimConfig {
            window: self.ssim.window,
            sigma: self.ssim.sigma,
            k1: self.ssim.k1,
            k2: self.ssim.k2,
            dynamic_range: match self.ssim.dynamic_range {
                DynamicRangeJson::Auto(_) => DynamicRange::Auto,
                DynamicRangeJson::Fixed(l) => DynamicRange::Fixed(l),
            },
        }
    }

    pub fn convention(&self) -> SignConvention {
        SignConvention {
            flip_x: self.convention.flip_x,
            flip_y: self.convention.flip_y,
        }
    }
}

/// Grid specification for the sweep command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kinds: Vec<String>,
    pub rows: usize,
    pub cols: usize,
    pub snr_db: Vec<f64>,
    pub methods: Vec<String>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Solver and metric settings shared by every cell; the cell's method,
    /// lambda, mu and seed override the matching fields.
    #[serde(default)]
    pub base: RunConfig,
}

fn default_amplitude() -> f64 {
    1.0
}

impl SweepSpec {
    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let spec: SweepSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        for (name, empty) in [
            ("kinds", self.kinds.is_empty()),
            ("snr_db", self.snr_db.is_empty()),
            ("methods", self.methods.is_empty()),
            ("lambda", self.lambda.is_empty()),
            ("mu", self.mu.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(CliError::usage(format!("sweep grid: {name} is empty")));
            }
        }
        for k in &self.kinds {
            gradshop_core::SynthKind::parse(k).map_err(|e| CliError::usage(e.to_string()))?;
        }
        for m in &self.methods {
            Method::parse(m)?;
        }
        self.base.validate()?;
        Ok(())
    }
}
