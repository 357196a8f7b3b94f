#![allow(dead_code)]

//! Dense-matrix oracles shared by the integration tests. Everything here is
//! built independently of the library's operator implementations: explicit
//! matrices, Gaussian elimination, column-major vectorization by hand.

use gradshop_core::{GradientField, SurfaceGrid};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(m: usize, n: usize, rng: &mut ChaCha8Rng) -> SurfaceGrid<f64> {
    SurfaceGrid::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_field(m: usize, n: usize, rng: &mut ChaCha8Rng) -> GradientField<f64> {
    let gx = random_grid(m, n, rng);
    let gy = random_grid(m, n, rng);
    GradientField::new(gx, gy).unwrap()
}

/// A smooth random surface: a few low-frequency cosine products.
pub fn random_smooth_grid(m: usize, n: usize, rng: &mut ChaCha8Rng) -> SurfaceGrid<f64> {
    let terms: Vec<(f64, f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0.2..1.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    SurfaceGrid::from_fn(m, n, |i, j| {
        let y = i as f64 / m as f64;
        let x = j as f64 / n as f64;
        terms
            .iter()
            .map(|&(a, fy, fx, py, px)| {
                a * (std::f64::consts::TAU * fy * y + py).cos()
                    * (std::f64::consts::TAU * fx * x + px).cos()
            })
            .sum()
    })
}

/// Column-major (Fortran) vectorization of a grid.
pub fn grid_to_vec(z: &SurfaceGrid<f64>) -> Vec<f64> {
    let (m, n) = z.dims();
    let mut v = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            v.push(z.get(i, j));
        }
    }
    v
}

pub fn vec_to_grid(v: &[f64], m: usize, n: usize) -> SurfaceGrid<f64> {
    SurfaceGrid::from_fn(m, n, |i, j| v[j * m + i])
}

/// Stacked [vec(gx); vec(gy)].
pub fn field_to_vec(g: &GradientField<f64>) -> Vec<f64> {
    let mut v = grid_to_vec(&g.gx);
    v.extend(grid_to_vec(&g.gy));
    v
}

/// Dense difference operator [D_n (x) I_m ; I_n (x) D_m] with the last
/// difference row of each 1-D block zeroed, shape 2mn x mn.
pub fn dense_diff_matrix(m: usize, n: usize) -> Vec<Vec<f64>> {
    let mn = m * n;
    let mut a = vec![vec![0.0; mn]; 2 * mn];
    for j in 0..n {
        for i in 0..m {
            let r = j * m + i;
            if j + 1 < n {
                a[r][(j + 1) * m + i] += 1.0;
                a[r][j * m + i] -= 1.0;
            }
            if i + 1 < m {
                a[mn + r][j * m + i + 1] += 1.0;
                a[mn + r][j * m + i] -= 1.0;
            }
        }
    }
    a
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(&r, &v)| r * v).sum())
        .collect()
}

pub fn mat_t_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let cols = a[0].len();
    let mut out = vec![0.0; cols];
    for (row, &xv) in a.iter().zip(x) {
        for (o, &r) in out.iter_mut().zip(row) {
            *o += r * xv;
        }
    }
    out
}

/// Solves a dense square system by Gaussian elimination with partial
/// pivoting.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        for r in k + 1..n {
            if m[r][k].abs() > m[piv][k].abs() {
                piv = r;
            }
        }
        m.swap(k, piv);
        rhs.swap(k, piv);
        assert!(m[k][k].abs() > 1e-12, "singular oracle system");
        for r in k + 1..n {
            let f = m[r][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for c in k..n {
                m[r][c] -= f * m[k][c];
            }
            rhs[r] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for c in k + 1..n {
            acc -= m[k][c] * x[c];
        }
        x[k] = acc / m[k][k];
    }
    x
}

/// Zero-mean least-squares solution of ||A z - v||^2: solves the normal
/// equations augmented with a rank-one term that pins down the constant
/// null-space direction.
pub fn dense_zero_mean_ls(a: &[Vec<f64>], v: &[f64], mn: usize) -> Vec<f64> {
    let mut normal = vec![vec![0.0; mn]; mn];
    for row in a.iter() {
        for i in 0..mn {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..mn {
                normal[i][j] += row[i] * row[j];
            }
        }
    }
    let one_over = 1.0 / mn as f64;
    for i in 0..mn {
        for j in 0..mn {
            normal[i][j] += one_over;
        }
    }
    let rhs = mat_t_vec(a, v);
    solve_dense(&normal, &rhs)
}
