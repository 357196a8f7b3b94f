//! Reconstruction quality metrics: mean local SSIM with Gaussian windows and
//! constant-aligned RMSE. Both metrics anchor their inputs to zero mean first
//! because the integration constant is unobservable.

use crate::error::{Error, Result};
use crate::field::SurfaceGrid;
use crate::scalar::Real;

/// Dynamic range used by the SSIM stabilizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynamicRange<S> {
    /// max - min of the reference surface.
    Auto,
    Fixed(S),
}

#[derive(Debug, Clone, Copy)]
pub struct SsimConfig<S> {
    /// Side length of the square Gaussian window.
    pub window: usize,
    pub sigma: S,
    pub k1: S,
    pub k2: S,
    pub dynamic_range: DynamicRange<S>,
}

impl<S: Real> Default for SsimConfig<S> {
    fn default() -> Self {
        SsimConfig {
            window: 11,
            sigma: S::of(1.5),
            k1: S::of(0.01),
            k2: S::of(0.03),
            dynamic_range: DynamicRange::Auto,
        }
    }
}

impl<S: Real> SsimConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be positive".into()));
        }
        if !(self.sigma > S::zero() && self.k1 > S::zero() && self.k2 > S::zero()) {
            return Err(Error::InvalidConfig(
                "sigma, k1 and k2 must be positive".into(),
            ));
        }
        if let DynamicRange::Fixed(l) = self.dynamic_range {
            if !(l > S::zero() && l.is_finite()) {
                return Err(Error::InvalidConfig(
                    "dynamic range must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Mean local SSIM over all fully-contained window positions.
pub fn ssim<S: Real>(
    candidate: &SurfaceGrid<S>,
    reference: &SurfaceGrid<S>,
    cfg: &SsimConfig<S>,
) -> Result<S> {
    cfg.validate()?;
    if candidate.dims() != reference.dims() {
        return Err(Error::dim_mismatch(candidate.dims(), reference.dims()));
    }
    let (m, n) = reference.dims();
    let w = cfg.window;
    if m < w || n < w {
        return Err(Error::GridTooSmall {
            rows: m,
            cols: n,
            min_rows: w,
            min_cols: w,
        });
    }

    let x = candidate.anchored_zero_mean();
    let y = reference.anchored_zero_mean();

    let range = match cfg.dynamic_range {
        DynamicRange::Fixed(l) => l,
        DynamicRange::Auto => {
            let (lo, hi) = y.min_max();
            let l = hi - lo;
            if l <= S::zero() {
                return Err(Error::InvalidConfig(
                    "reference surface is constant; auto dynamic range undefined".into(),
                ));
            }
            l
        }
    };
    let c1 = (cfg.k1 * range) * (cfg.k1 * range);
    let c2 = (cfg.k2 * range) * (cfg.k2 * range);

    let weights = gaussian_window::<S>(w, cfg.sigma);

    let mut acc = S::zero();
    let mut windows = 0usize;
    for r0 in 0..=(m - w) {
        for c0 in 0..=(n - w) {
            let mut mu_x = S::zero();
            let mut mu_y = S::zero();
            let mut xx = S::zero();
            let mut yy = S::zero();
            let mut xy = S::zero();
            let mut k = 0usize;
            for dr in 0..w {
                for dc in 0..w {
                    let wgt = weights[k];
                    k += 1;
                    let a = x.get(r0 + dr, c0 + dc);
                    let b = y.get(r0 + dr, c0 + dc);
                    mu_x += wgt * a;
                    mu_y += wgt * b;
                    xx += wgt * a * a;
                    yy += wgt * b * b;
                    xy += wgt * a * b;
                }
            }
            let var_x = xx - mu_x * mu_x;
            let var_y = yy - mu_y * mu_y;
            let cov = xy - mu_x * mu_y;
            let num = (S::of(2.0) * mu_x * mu_y + c1) * (S::of(2.0) * cov + c2);
            let den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
            acc += num / den;
            windows += 1;
        }
    }
    Ok(acc / S::from_usize(windows).unwrap())
}

/// Normalized Gaussian weights for a square window, row-major.
fn gaussian_window<S: Real>(w: usize, sigma: S) -> Vec<S> {
    let half = (w as f64 - 1.0) / 2.0;
    let s2 = 2.0 * sigma.to_f64().unwrap().powi(2);
    let mut out = Vec::with_capacity(w * w);
    let mut sum = S::zero();
    for r in 0..w {
        for c in 0..w {
            let dr = r as f64 - half;
            let dc = c as f64 - half;
            let v = S::of((-(dr * dr + dc * dc) / s2).exp());
            sum += v;
            out.push(v);
        }
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// Root-mean-square error after removing each grid's mean.
pub fn rmse_aligned<S: Real>(
    candidate: &SurfaceGrid<S>,
    reference: &SurfaceGrid<S>,
) -> Result<S> {
    if candidate.dims() != reference.dims() {
        return Err(Error::dim_mismatch(candidate.dims(), reference.dims()));
    }
    let mc = candidate.mean();
    let mr = reference.mean();
    let mut acc = S::zero();
    for (&a, &b) in candidate.values().iter().zip(reference.values()) {
        let d = (a - mc) - (b - mr);
        acc += d * d;
    }
    Ok((acc / S::from_usize(candidate.values().len()).unwrap()).sqrt())
}
