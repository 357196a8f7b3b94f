//! End-to-end photometric-stereo and synthetic-data pipelines.

mod common;

use common::*;
use gradshop_core::{
    estimate_normals, integrate_dct, make_surface, normals_to_gradients, render_lambertian,
    rmse_aligned, LightingSet, SignConvention, SurfaceGrid, SynthKind, SynthSpec,
};
use rand::Rng;

/// Lights drawn in a cone around the zenith; well conditioned, shadow-free
/// for mild surfaces.
fn cone_lights(count: usize, seed: u64) -> LightingSet<f64> {
    let mut r = rng(seed);
    let dirs: Vec<[f64; 3]> = (0..count)
        .map(|_| {
            let tilt: f64 = r.random_range(0.05..0.35);
            let phase: f64 = r.random_range(0.0..std::f64::consts::TAU);
            [tilt * phase.cos(), tilt * phase.sin(), (1.0 - tilt * tilt).sqrt()]
        })
        .collect();
    LightingSet::new(dirs).unwrap()
}

fn gentle_bump(n: usize) -> SurfaceGrid<f64> {
    SurfaceGrid::from_fn(n, n, |i, j| {
        let x = 2.0 * j as f64 / (n as f64 - 1.0) - 1.0;
        let y = 2.0 * i as f64 / (n as f64 - 1.0) - 1.0;
        2.0 * (-3.0 * (x * x + y * y)).exp()
    })
}

#[test]
fn noiseless_photometric_round_trip_is_exact() {
    let n = 64;
    let z = gentle_bump(n);
    let lights = cone_lights(10, 42);
    let conv = SignConvention::default();
    let stack = render_lambertian(&z, &lights, 0.9, conv).unwrap();
    let nm = estimate_normals(&stack, &lights, 1e-6).unwrap();
    assert_eq!(nm.degenerate_count(), 0);
    let g = normals_to_gradients(&nm, conv);
    let rec = integrate_dct(&g).unwrap();
    let truth = z.anchored_zero_mean();
    let (lo, hi) = truth.min_max();
    let err = rmse_aligned(&rec, &truth).unwrap();
    assert!(err <= 1e-5 * (hi - lo), "rmse {err}");
}

#[test]
fn estimated_normals_match_rendered_normals() {
    // mean angular error on a smooth shadow-free surface
    let n = 48;
    let z = gentle_bump(n);
    let lights = cone_lights(6, 7);
    let conv = SignConvention::default();
    let stack = render_lambertian(&z, &lights, 1.0, conv).unwrap();
    let est = estimate_normals(&stack, &lights, 1e-6).unwrap();
    let truth = gradshop_core::gradients_to_normals(
        &gradshop_core::apply_diff(&z),
        conv,
        1e-6,
    )
    .unwrap();
    let mut total = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let a = est.normal(i, j);
            let b = truth.normal(i, j);
            let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
            total += dot.acos();
        }
    }
    let mean = total / (n * n) as f64;
    assert!(mean <= 1e-8, "mean angular error {mean}");
}

#[test]
fn tent_and_vase_integrate_well_without_noise() {
    // Discretization is the only error source on clean analytic gradients.
    // The vase's rim has a vertical tangent, so its floor is noticeably
    // higher than the tent's.
    for (kind, bound) in [(SynthKind::Tent, 0.02), (SynthKind::Vase, 0.05)] {
        let spec = SynthSpec::new(kind, 64, 64, 1.0).unwrap();
        let (z0, g) = make_surface(&spec);
        let rec = integrate_dct(&g).unwrap();
        let truth = z0.anchored_zero_mean();
        let (lo, hi) = truth.min_max();
        let err = rmse_aligned(&rec, &truth).unwrap();
        assert!(err < bound * (hi - lo), "{kind:?}: rmse {err}");
    }
}
