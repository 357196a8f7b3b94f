//! Synthetic ground-truth surfaces with analytic gradients, and exact-ratio
//! Gaussian noise injection at a prescribed SNR.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::{GradientField, SurfaceGrid};
use crate::photometric::ImageStack;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Pyramidal ridge with sharp creases.
    Tent,
    /// Surface of revolution with a smooth polynomial radius profile.
    Vase,
}

impl SynthKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "tent" => Ok(SynthKind::Tent),
            "vase" => Ok(SynthKind::Vase),
            other => Err(Error::InvalidConfig(format!(
                "unknown surface kind \"{other}\" (expected tent or vase)"
            ))),
        }
    }
}

/// Specification of a deterministic synthetic surface on `[-1, 1]^2`.
#[derive(Debug, Clone, Copy)]
pub struct SynthSpec<S> {
    pub kind: SynthKind,
    pub rows: usize,
    pub cols: usize,
    pub amplitude: S,
}

impl<S: Real> SynthSpec<S> {
    pub fn new(kind: SynthKind, rows: usize, cols: usize, amplitude: S) -> Result<Self> {
        if rows < 16 || cols < 16 {
            return Err(Error::GridTooSmall {
                rows,
                cols,
                min_rows: 16,
                min_cols: 16,
            });
        }
        if !(amplitude > S::zero() && amplitude.is_finite()) {
            return Err(Error::InvalidConfig("amplitude must be positive".into()));
        }
        Ok(SynthSpec {
            kind,
            rows,
            cols,
            amplitude,
        })
    }
}

/// Samples the surface and its analytic partial derivatives on the grid.
///
/// The returned gradients are the exact derivatives of the defining function
/// scaled to grid units (per-pixel steps), not finite differences. On the
/// measure-zero crease sets where the gradient is undefined, the midpoint of
/// the one-sided limits is emitted.
pub fn make_surface<S: Real>(spec: &SynthSpec<S>) -> (SurfaceGrid<S>, GradientField<S>) {
    let (m, n) = (spec.rows, spec.cols);
    let amp = spec.amplitude.to_f64().unwrap();
    let dx = 2.0 / (n as f64 - 1.0);
    let dy = 2.0 / (m as f64 - 1.0);

    let mut z = SurfaceGrid::zeros(m, n);
    let mut gx = SurfaceGrid::zeros(m, n);
    let mut gy = SurfaceGrid::zeros(m, n);
    for i in 0..m {
        let y = -1.0 + dy * i as f64;
        for j in 0..n {
            let x = -1.0 + dx * j as f64;
            let (h, hx, hy) = match spec.kind {
                SynthKind::Tent => tent_point(x, y, amp),
                SynthKind::Vase => vase_point(x, y, amp),
            };
            z.set(i, j, S::of(h));
            gx.set(i, j, S::of(hx * dx));
            gy.set(i, j, S::of(hy * dy));
        }
    }
    (z, GradientField { gx, gy })
}

/// `z = amp * max(0, 1 - max(|x|, |y|))` and its derivative.
fn tent_point(x: f64, y: f64, amp: f64) -> (f64, f64, f64) {
    let h = x.abs().max(y.abs());
    let z = amp * (1.0 - h).max(0.0);
    // outer factor: -1 inside the support, midpoint -1/2 on its boundary
    let gp = if h < 1.0 {
        -1.0
    } else if h == 1.0 {
        -0.5
    } else {
        0.0
    };
    // gradient of max(|x|, |y|), midpoint on the diagonal creases
    let (hx, hy) = if x.abs() > y.abs() {
        (x.signum(), 0.0)
    } else if y.abs() > x.abs() {
        (0.0, y.signum())
    } else if x == 0.0 && y == 0.0 {
        (0.0, 0.0)
    } else {
        (0.5 * x.signum(), 0.5 * y.signum())
    };
    (z, amp * gp * hx, amp * gp * hy)
}

/// Surface of revolution `z = amp * sqrt(max(0, r(y)^2 - x^2))` with
/// `r(y) = 0.4 + 0.3 (1 - y^2)(1 + 0.5 y)`, zero outside the support.
fn vase_point(x: f64, y: f64, amp: f64) -> (f64, f64, f64) {
    let r = 0.4 + 0.3 * (1.0 - y * y) * (1.0 + 0.5 * y);
    let rp = 0.3 * (0.5 - 2.0 * y - 1.5 * y * y);
    let s = r * r - x * x;
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let root = s.sqrt();
    (amp * root, -amp * x / root, amp * r * rp / root)
}

/// Adds i.i.d. Gaussian noise to both gradient components, scaled so the
/// realized SNR `20 log10(||g|| / ||noise||)` equals `snr_db` exactly.
///
/// Noise entries are drawn from a ChaCha8 generator seeded with `seed`, all
/// of `gx` in row-major order first, then all of `gy`.
pub fn add_noise_snr<S: Real>(
    g: &GradientField<S>,
    snr_db: S,
    seed: u64,
) -> Result<GradientField<S>> {
    let signal = g.norm();
    if signal == S::zero() {
        return Err(Error::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 2 * g.rows() * g.cols();
    let noise: Vec<S> = (0..total)
        .map(|_| S::of(<StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)))
        .collect();
    let raw_norm = noise.iter().fold(S::zero(), |a, &b| a + b * b).sqrt();
    if raw_norm == S::zero() {
        return Err(Error::InvalidConfig("degenerate noise draw".into()));
    }
    let target = signal * S::of(10.0).powf(-snr_db / S::of(20.0));
    let scale = target / raw_norm;

    let half = g.rows() * g.cols();
    let mut out = g.clone();
    for (k, v) in out.gx.values_mut().iter_mut().enumerate() {
        *v += scale * noise[k];
    }
    for (k, v) in out.gy.values_mut().iter_mut().enumerate() {
        *v += scale * noise[half + k];
    }
    Ok(out)
}

/// Same exact-ratio rule applied to a whole image stack: the SNR is defined
/// on the stacked tensor of all images jointly. Draw order is image by image,
/// each row-major.
pub fn add_image_noise_snr<S: Real>(
    stack: &ImageStack<S>,
    snr_db: S,
    seed: u64,
) -> Result<ImageStack<S>> {
    let mut signal_sq = S::zero();
    for img in stack.images() {
        for &v in img.values() {
            signal_sq += v * v;
        }
    }
    let signal = signal_sq.sqrt();
    if signal == S::zero() {
        return Err(Error::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_image = stack.rows() * stack.cols();
    let total = stack.count() * per_image;
    let noise: Vec<S> = (0..total)
        .map(|_| S::of(<StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)))
        .collect();
    let raw_norm = noise.iter().fold(S::zero(), |a, &b| a + b * b).sqrt();
    if raw_norm == S::zero() {
        return Err(Error::InvalidConfig("degenerate noise draw".into()));
    }
    let target = signal * S::of(10.0).powf(-snr_db / S::of(20.0));
    let scale = target / raw_norm;

    let mut images = Vec::with_capacity(stack.count());
    for (idx, img) in stack.images().iter().enumerate() {
        let mut noisy = img.clone();
        for (k, v) in noisy.values_mut().iter_mut().enumerate() {
            *v += scale * noise[idx * per_image + k];
        }
        images.push(noisy);
    }
    // noise can push intensities below zero; that is expected here
    ImageStack::new_allow_negative(images)
}
