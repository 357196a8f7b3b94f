//! Operator-level checks against explicit dense matrices.

mod common;

use common::*;
use rand::Rng;
use gradshop_core::{
    accumulate_patches, apply_diff, apply_diff_adjoint, coverage_counts, dct_dictionary,
    extract_patches, integrate_dct, ls_gradient, ls_objective, patch_indices, z_prox_step,
    DlsConfig, GradientField, PatchConfig, SparseCodes, SurfaceGrid,
};

#[test]
fn apply_diff_matches_dense_kronecker_matrix() {
    let mut r = rng(11);
    for &(m, n) in &[(3usize, 3usize), (5, 4), (2, 7), (8, 8)] {
        let z = random_grid(m, n, &mut r);
        let a = dense_diff_matrix(m, n);
        let want = matvec(&a, &grid_to_vec(&z));
        let got = field_to_vec(&apply_diff(&z));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}

#[test]
fn adjoint_matches_dense_transpose() {
    let mut r = rng(12);
    for &(m, n) in &[(2usize, 2usize), (5, 4), (4, 6)] {
        let g = random_field(m, n, &mut r);
        let a = dense_diff_matrix(m, n);
        let want = mat_t_vec(&a, &field_to_vec(&g));
        let got = grid_to_vec(&apply_diff_adjoint(&g));
        for (gv, wv) in got.iter().zip(&want) {
            assert!((gv - wv).abs() < 1e-12);
        }
    }
}

#[test]
fn adjoint_single_entry_column() {
    // 2x2 field with one nonzero gx entry picks out one column of A'
    let mut g = GradientField::<f64>::zeros(2, 2);
    g.gx.set(0, 0, 1.0);
    let a = dense_diff_matrix(2, 2);
    let want = mat_t_vec(&a, &field_to_vec(&g));
    let got = grid_to_vec(&apply_diff_adjoint(&g));
    assert_eq!(got, want);
}

#[test]
fn adjoint_identity_inner_products() {
    let mut r = rng(13);
    for trial in 0..20 {
        let (m, n) = (5, 4);
        let z = random_grid(m, n, &mut r);
        let g = random_field(m, n, &mut r);
        let az = apply_diff(&z);
        let lhs = az.dot(&g);
        let atg = apply_diff_adjoint(&g);
        let rhs: f64 = z
            .values()
            .iter()
            .zip(atg.values())
            .map(|(&a, &b)| a * b)
            .sum();
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
            "trial {trial}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn ls_objective_matches_dense_evaluation() {
    let mut r = rng(14);
    for &(m, n) in &[(3usize, 5usize), (6, 6)] {
        let z = random_grid(m, n, &mut r);
        let g = random_field(m, n, &mut r);
        let a = dense_diff_matrix(m, n);
        let az = matvec(&a, &grid_to_vec(&z));
        let v = field_to_vec(&g);
        let want: f64 = 0.5
            * az.iter()
                .zip(&v)
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<f64>();
        let got = ls_objective(&z, &g).unwrap();
        assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn ls_gradient_matches_central_differences() {
    let mut r = rng(15);
    let (m, n) = (5, 6);
    let z = random_grid(m, n, &mut r);
    let g = random_field(m, n, &mut r);
    let grad = ls_gradient(&z, &g).unwrap();
    let d = random_grid(m, n, &mut r);
    let eps = 1e-6;
    let mut zp = z.clone();
    let mut zm = z.clone();
    for ((p, m_), &dv) in zp
        .values_mut()
        .iter_mut()
        .zip(zm.values_mut())
        .zip(d.values())
    {
        *p += eps * dv;
        *m_ -= eps * dv;
    }
    let fd = (ls_objective(&zp, &g).unwrap() - ls_objective(&zm, &g).unwrap()) / (2.0 * eps);
    let directional: f64 = grad
        .values()
        .iter()
        .zip(d.values())
        .map(|(&a, &b)| a * b)
        .sum();
    assert!(
        (fd - directional).abs() <= 1e-5 * directional.abs().max(1.0),
        "{fd} vs {directional}"
    );
}

#[test]
fn gradient_vanishes_at_dct_solution() {
    let mut r = rng(16);
    let g = random_field(12, 10, &mut r);
    let z = integrate_dct(&g).unwrap();
    let grad = ls_gradient(&z, &g).unwrap();
    assert!(grad.norm() <= 1e-7);
}

#[test]
fn integrate_recovers_random_smooth_surface() {
    let mut r = rng(17);
    let z0 = random_smooth_grid(24, 20, &mut r);
    let g = apply_diff(&z0);
    let z = integrate_dct(&g).unwrap();
    assert!(z.max_abs_diff(&z0.anchored_zero_mean()) < 1e-8);
}

#[test]
fn integrate_matches_dense_least_squares_on_non_integrable_data() {
    let mut r = rng(18);
    let (m, n) = (4, 4);
    let g = random_field(m, n, &mut r);
    let a = dense_diff_matrix(m, n);
    let want = dense_zero_mean_ls(&a, &field_to_vec(&g), m * n);
    let got = integrate_dct(&g).unwrap();
    let want_grid = vec_to_grid(&want, m, n).anchored_zero_mean();
    assert!(got.max_abs_diff(&want_grid) < 1e-8);
}

#[test]
fn operator_norm_bounded_by_eight() {
    // power iteration on A'A
    for &(m, n) in &[(4usize, 4usize), (7, 5), (12, 9)] {
        let mut v = SurfaceGrid::from_fn(m, n, |i, j| ((i * 13 + j * 7) % 11) as f64 - 5.0);
        let mut lam = 0.0f64;
        for _ in 0..200 {
            let w = apply_diff_adjoint(&apply_diff(&v));
            lam = w.norm() / v.norm();
            let nrm = w.norm();
            v = SurfaceGrid::from_fn(m, n, |i, j| w.get(i, j) / nrm);
        }
        assert!(lam <= 8.0 + 1e-9, "{m}x{n}: |A|^2 = {lam}");
        assert!(lam > 4.0); // sanity: not trivially small
    }
}

#[test]
fn data_term_is_convex() {
    let mut r = rng(19);
    for _ in 0..10 {
        let g = random_field(6, 6, &mut r);
        let z1 = random_grid(6, 6, &mut r);
        let z2 = random_grid(6, 6, &mut r);
        let mid = SurfaceGrid::from_fn(6, 6, |i, j| 0.5 * (z1.get(i, j) + z2.get(i, j)));
        let f1 = ls_objective(&z1, &g).unwrap();
        let f2 = ls_objective(&z2, &g).unwrap();
        let fm = ls_objective(&mid, &g).unwrap();
        assert!(fm <= 0.5 * (f1 + f2) + 1e-12);
    }
}

#[test]
fn integrate_invariant_to_constant_in_generator() {
    let mut r = rng(20);
    let z0 = random_smooth_grid(16, 16, &mut r);
    let mut shifted = z0.clone();
    for v in shifted.values_mut() {
        *v += 42.0;
    }
    let za = integrate_dct(&apply_diff(&z0)).unwrap();
    let zb = integrate_dct(&apply_diff(&shifted)).unwrap();
    assert!(za.max_abs_diff(&zb) < 1e-10);
}

#[test]
fn prox_step_matches_dense_solve() {
    // both a single-patch config and an overlapping one
    let configs = [
        (
            4usize,
            4usize,
            PatchConfig {
                patch_h: 4,
                patch_w: 4,
                stride: 2,
                clamp_boundary: true,
            },
        ),
        (
            6,
            7,
            PatchConfig {
                patch_h: 3,
                patch_w: 3,
                stride: 2,
                clamp_boundary: true,
            },
        ),
    ];
    let mut r = rng(21);
    for (m, n, patch) in configs {
        let natoms = patch.patch_dim();
        let cfg = DlsConfig::<f64> {
            patch,
            natoms,
            lambda: 0.3,
            ..DlsConfig::default()
        };
        let z = random_grid(m, n, &mut r);
        let g = random_field(m, n, &mut r);
        let dict = dct_dictionary::<f64>(patch.patch_h, patch.patch_w, natoms).unwrap();
        let count = patch_indices(m, n, &patch).unwrap().len();
        let vals: Vec<f64> = (0..natoms * count)
            .map(|_| r.random_range(-0.5..0.5))
            .collect();
        let codes = SparseCodes::new(natoms, count, vals, cfg.bound_a).unwrap();

        let got = z_prox_step(&z, &g, &dict, &codes, &cfg).unwrap();

        // dense prox system: (I + 2 tau lambda sum P'P) z+ = z_tilde + 2 tau lambda sum P' D b
        let mn = m * n;
        let origins = patch_indices(m, n, &patch).unwrap();
        let mut lhs = vec![vec![0.0; mn]; mn];
        let ttl = 2.0 * cfg.tau * cfg.lambda;
        for k in 0..mn {
            lhs[k][k] = 1.0;
        }
        for &(r0, c0) in &origins {
            for pc in 0..patch.patch_w {
                for pr in 0..patch.patch_h {
                    let idx = (c0 + pc) * m + (r0 + pr); // column-major
                    lhs[idx][idx] += ttl;
                }
            }
        }
        let grad = ls_gradient(&z, &g).unwrap();
        let mut rhs = vec![0.0; mn];
        for j in 0..n {
            for i in 0..m {
                rhs[j * m + i] = z.get(i, j) - cfg.tau * grad.get(i, j);
            }
        }
        for (pj, &(r0, c0)) in origins.iter().enumerate() {
            // D b_j
            let mut patch_recon = vec![0.0; patch.patch_dim()];
            for a in 0..natoms {
                let beta = codes.row(a)[pj];
                if beta != 0.0 {
                    for (pv, &av) in patch_recon.iter_mut().zip(dict.atom(a)) {
                        *pv += beta * av;
                    }
                }
            }
            let mut k = 0;
            for pc in 0..patch.patch_w {
                for pr in 0..patch.patch_h {
                    rhs[(c0 + pc) * m + (r0 + pr)] += ttl * patch_recon[k];
                    k += 1;
                }
            }
        }
        let want = solve_dense(&lhs, &rhs);
        let want_grid = vec_to_grid(&want, m, n);
        assert!(
            got.max_abs_diff(&want_grid) < 1e-10,
            "prox mismatch for {m}x{n}"
        );
    }
}

#[test]
fn patch_operators_match_dense_definitions() {
    // extract = P_j z row by row; accumulate = sum P_j' applied densely
    let patch = PatchConfig {
        patch_h: 3,
        patch_w: 2,
        stride: 2,
        clamp_boundary: true,
    };
    let (m, n) = (7, 6);
    let mut r = rng(22);
    let z = random_grid(m, n, &mut r);
    let origins = patch_indices(m, n, &patch).unwrap();
    let pm = extract_patches(&z, &patch).unwrap();
    for (j, &(r0, c0)) in origins.iter().enumerate() {
        let mut k = 0;
        for pc in 0..patch.patch_w {
            for pr in 0..patch.patch_h {
                assert_eq!(pm.column(j)[k], z.get(r0 + pr, c0 + pc));
                k += 1;
            }
        }
    }
    let acc = accumulate_patches(&pm, &patch, m, n).unwrap();
    let cov = coverage_counts::<f64>(&patch, m, n).unwrap();
    // for extract-then-accumulate, the result is coverage .* z
    for i in 0..m {
        for j in 0..n {
            assert!((acc.get(i, j) - cov.get(i, j) * z.get(i, j)).abs() < 1e-12);
        }
    }
}
