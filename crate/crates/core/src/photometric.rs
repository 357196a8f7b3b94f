//! Photometric-stereo front end: per-pixel least-squares normal estimation
//! from an image stack under known lights, and the normals-to-gradients
//! conversion with an explicit sign convention.

use crate::error::{Error, Result};
use crate::field::{GradientField, NormalMap, SurfaceGrid, NZ_MIN_DEFAULT};
use crate::integrate::apply_diff;
use crate::scalar::Real;

/// Sign convention relating (p, q) = (n1/n3, n2/n3) to the surface
/// derivatives. The default negates p only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignConvention {
    pub flip_x: bool,
    pub flip_y: bool,
}

impl Default for SignConvention {
    fn default() -> Self {
        SignConvention {
            flip_x: true,
            flip_y: false,
        }
    }
}

/// Known lighting directions, unit-normalized, full rank.
#[derive(Debug, Clone)]
pub struct LightingSet<S> {
    directions: Vec<[S; 3]>,
    condition: S,
}

impl<S: Real> LightingSet<S> {
    /// Normalizes the directions and verifies the rank-3 condition.
    pub fn new(directions: Vec<[S; 3]>) -> Result<Self> {
        if directions.len() < 3 {
            return Err(Error::TooFewLights(directions.len()));
        }
        let mut dirs = Vec::with_capacity(directions.len());
        for (k, d) in directions.into_iter().enumerate() {
            if d.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite {
                    what: "lighting directions",
                    row: k,
                    col: 0,
                });
            }
            let nrm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if nrm <= S::of(1e-12) {
                return Err(Error::InvalidConfig(format!("light {k} is a zero vector")));
            }
            dirs.push([d[0] / nrm, d[1] / nrm, d[2] / nrm]);
        }
        let gram = gram_matrix(&dirs);
        let eig = symmetric_eigenvalues_3x3(&gram);
        let (lo, hi) = (eig[0], eig[2]);
        if !(lo > hi * S::of(1e-12) && lo > S::zero()) {
            let cond = if lo > S::zero() {
                (hi / lo).sqrt().to_f64().unwrap_or(f64::INFINITY)
            } else {
                f64::INFINITY
            };
            return Err(Error::RankDeficientLighting { cond });
        }
        let condition = (hi / lo).sqrt();
        Ok(LightingSet {
            directions: dirs,
            condition,
        })
    }

    pub fn count(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[[S; 3]] {
        &self.directions
    }

    /// Condition number of the direction matrix; values above ~1e6 make the
    /// per-pixel solves unreliable.
    pub fn condition_number(&self) -> S {
        self.condition
    }
}

fn gram_matrix<S: Real>(dirs: &[[S; 3]]) -> [[S; 3]; 3] {
    let mut g = [[S::zero(); 3]; 3];
    for d in dirs {
        for r in 0..3 {
            for c in 0..3 {
                g[r][c] += d[r] * d[c];
            }
        }
    }
    g
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations,
/// ascending.
fn symmetric_eigenvalues_3x3<S: Real>(m: &[[S; 3]; 3]) -> [S; 3] {
    let mut a = *m;
    for _ in 0..32 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= S::of(1e-30) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == S::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (S::of(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
            let c = S::one() / (t * t + S::one()).sqrt();
            let s = t * c;
            // rotate rows p and q, then the matching columns
            let mut rows = a;
            for k in 0..3 {
                rows[p][k] = c * a[p][k] - s * a[q][k];
                rows[q][k] = s * a[p][k] + c * a[q][k];
            }
            let mut full = rows;
            for k in 0..3 {
                full[k][p] = c * rows[k][p] - s * rows[k][q];
                full[k][q] = s * rows[k][p] + c * rows[k][q];
            }
            a = full;
        }
    }
    let mut eig = [a[0][0], a[1][1], a[2][2]];
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// A stack of same-sized intensity images, one per light.
#[derive(Debug, Clone)]
pub struct ImageStack<S> {
    images: Vec<SurfaceGrid<S>>,
}

impl<S: Real> ImageStack<S> {
    /// Builds a stack of clean intensity images (finite, nonnegative).
    pub fn new(images: Vec<SurfaceGrid<S>>) -> Result<Self> {
        let stack = Self::new_allow_negative(images)?;
        for (k, img) in stack.images.iter().enumerate() {
            if img.values().iter().any(|&v| v < S::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "image {k} contains negative intensities"
                )));
            }
        }
        Ok(stack)
    }

    /// Like [`ImageStack::new`] but admits negative intensities, as produced
    /// by additive noise on a clean stack.
    pub fn new_allow_negative(images: Vec<SurfaceGrid<S>>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::InvalidConfig("image stack is empty".into()));
        }
        let dims = images[0].dims();
        for img in &images[1..] {
            if img.dims() != dims {
                return Err(Error::dim_mismatch(dims, img.dims()));
            }
        }
        Ok(ImageStack { images })
    }

    pub fn count(&self) -> usize {
        self.images.len()
    }

    pub fn rows(&self) -> usize {
        self.images[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.images[0].cols()
    }

    pub fn images(&self) -> &[SurfaceGrid<S>] {
        &self.images
    }
}

/// Per-pixel least-squares normal estimation.
///
/// Solves `min_g ||L g - intensities||^2` at every pixel and normalizes the
/// result; the albedo (the norm of `g`) is discarded. Pixels with a
/// numerically zero solution or a z-component below `nz_min` are marked
/// degenerate and carry the default normal (0, 0, 1).
pub fn estimate_normals<S: Real>(
    images: &ImageStack<S>,
    lights: &LightingSet<S>,
    nz_min: S,
) -> Result<NormalMap<S>> {
    if images.count() != lights.count() {
        return Err(Error::InvalidConfig(format!(
            "{} images but {} lights",
            images.count(),
            lights.count()
        )));
    }
    let gram = gram_matrix(lights.directions());
    let gram_inv = invert_spd_3x3(&gram).ok_or(Error::RankDeficientLighting {
        cond: lights.condition_number().to_f64().unwrap_or(f64::INFINITY),
    })?;

    let (m, n) = (images.rows(), images.cols());
    let mut vectors = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            // rhs = L' I
            let mut rhs = [S::zero(); 3];
            for (img, l) in images.images().iter().zip(lights.directions()) {
                let intensity = img.get(i, j);
                for k in 0..3 {
                    rhs[k] += l[k] * intensity;
                }
            }
            let mut g = [S::zero(); 3];
            for r in 0..3 {
                for c in 0..3 {
                    g[r] += gram_inv[r][c] * rhs[c];
                }
            }
            vectors.push(g);
        }
    }
    NormalMap::new(m, n, vectors, nz_min)
}

fn invert_spd_3x3<S: Real>(a: &[[S; 3]; 3]) -> Option<[[S; 3]; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det.abs() <= S::of(1e-30) {
        return None;
    }
    let inv_det = S::one() / det;
    let mut inv = [[S::zero(); 3]; 3];
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det;
    Some(inv)
}

/// Converts normals to gradient targets: `p = n1/n3`, `q = n2/n3`, with the
/// convention's sign flips applied. Degenerate pixels yield zero gradients.
pub fn normals_to_gradients<S: Real>(
    nmap: &NormalMap<S>,
    conv: SignConvention,
) -> GradientField<S> {
    let (m, n) = nmap.dims();
    let mut gx = SurfaceGrid::zeros(m, n);
    let mut gy = SurfaceGrid::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            if nmap.is_degenerate(i, j) {
                continue;
            }
            let nv = nmap.normal(i, j);
            let p = nv[0] / nv[2];
            let q = nv[1] / nv[2];
            gx.set(i, j, if conv.flip_x { -p } else { p });
            gy.set(i, j, if conv.flip_y { -q } else { q });
        }
    }
    GradientField { gx, gy }
}

/// Builds the normal map whose [`normals_to_gradients`] image under the same
/// convention is exactly `g`.
pub fn gradients_to_normals<S: Real>(
    g: &GradientField<S>,
    conv: SignConvention,
    nz_min: S,
) -> Result<NormalMap<S>> {
    let (m, n) = g.dims();
    let mut vectors = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let p = if conv.flip_x {
                -g.gx.get(i, j)
            } else {
                g.gx.get(i, j)
            };
            let q = if conv.flip_y {
                -g.gy.get(i, j)
            } else {
                g.gy.get(i, j)
            };
            vectors.push([p, q, S::one()]);
        }
    }
    NormalMap::new(m, n, vectors, nz_min)
}

/// Renders a Lambertian image stack of the surface under the given lights.
///
/// Normals come from the forward differences of `z`, inverting the sign
/// convention so the full estimate-and-integrate round trip reproduces `z`.
/// Intensity is `albedo * max(0, n . l)`.
pub fn render_lambertian<S: Real>(
    z: &SurfaceGrid<S>,
    lights: &LightingSet<S>,
    albedo: S,
    conv: SignConvention,
) -> Result<ImageStack<S>> {
    if !(albedo > S::zero() && albedo.is_finite()) {
        return Err(Error::InvalidConfig("albedo must be positive".into()));
    }
    let g = apply_diff(z);
    let nmap = gradients_to_normals(&g, conv, S::of(NZ_MIN_DEFAULT))?;
    let (m, n) = z.dims();
    let mut images = Vec::with_capacity(lights.count());
    for l in lights.directions() {
        let mut img = SurfaceGrid::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let nv = nmap.normal(i, j);
                let shade = nv[0] * l[0] + nv[1] * l[1] + nv[2] * l[2];
                img.set(i, j, albedo * shade.max(S::zero()));
            }
        }
        images.push(img);
    }
    ImageStack::new(images)
}
