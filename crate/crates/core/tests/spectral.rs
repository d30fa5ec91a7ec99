use std::f64::consts::PI;

use membrane_bifurcation::linearized::solve_h;
use membrane_bifurcation::shooting::{
    shoot_sigma0, BoundaryCircle, ShootingOptions, Sigma0Solution,
};
use membrane_bifurcation::spectral::{
    assemble_mode, certify, certify_circle, eigen_solve, eigen_solve_modes, kernel_residual_m1,
    m1_kernel_shape_error, mode_residual_on, CertificateEvidence, Verdict, DEFAULT_GRID,
};
use membrane_bifurcation::{
    integrate_profile, Error, IntegratorSettings, ModelParams, StopCondition,
};

/// Lowest `m = 2` eigenvalue on the disc spanning `(0.5, -3)`. Extrapolated
/// values for n = 1000, 2000, 4000 agree to 3e-12.
const M2_LOWEST: f64 = 0.827858620917;
const M0_LOWEST: f64 = -0.489567402486;
const M1_FIRST_NONZERO: f64 = 1.8224370328;

fn sigma0() -> Sigma0Solution {
    shoot_sigma0(
        &BoundaryCircle::new(0.5, -3.0).unwrap(),
        None,
        &IntegratorSettings::default(),
        &ShootingOptions::default(),
    )
    .unwrap()
}

#[test]
fn frozen_lowest_eigenvalues() {
    let sol = sigma0();
    let spectra = eigen_solve_modes(&sol.curve, 2, 2, DEFAULT_GRID).unwrap();
    let [m0, m1, m2] = [&spectra[0], &spectra[1], &spectra[2]];
    assert!((m0.eigenvalues[0] - M0_LOWEST).abs() < 1e-9);
    assert!(m0.eigenvalues[1] > 0.0);
    assert!(m1.eigenvalues[0].abs() < 1e-9);
    assert!((m1.eigenvalues[1] - M1_FIRST_NONZERO).abs() < 1e-9);
    assert!((m2.eigenvalues[0] - M2_LOWEST).abs() < 1e-9);
    for e in &spectra {
        assert!(e.discrete_residual < 1e-10, "m = {}", e.m);
    }
}

#[test]
fn second_order_convergence_and_extrapolation() {
    let sol = sigma0();
    let a = eigen_solve(&sol.curve, 2, 1, 500).unwrap();
    let b = eigen_solve(&sol.curve, 2, 1, 1000).unwrap();
    // a: 500 / 1000 intervals, b: 1000 / 2000
    let d1 = a.eigenvalues_fine[0] - a.eigenvalues_coarse[0];
    let d2 = b.eigenvalues_fine[0] - b.eigenvalues_coarse[0];
    let order = (d1 / d2).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
    assert!((a.eigenvalues[0] - b.eigenvalues[0]).abs() < 1e-3 * d2.abs());
}

#[test]
fn eigenvalues_scale_with_fourth_power() {
    let base = sigma0();
    let mu = 2.0;
    let scaled = shoot_sigma0(
        &BoundaryCircle::new(0.5 * mu, -3.0 * mu).unwrap(),
        None,
        &IntegratorSettings::default(),
        &ShootingOptions::default(),
    )
    .unwrap();
    for m in 0..=2 {
        let a = eigen_solve(&base.curve, m, 2, 500).unwrap();
        let b = eigen_solve(&scaled.curve, m, 2, 500).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!(
                (y * mu.powi(4) - x).abs() < 1e-8 * x.abs().max(1.0),
                "m = {m}"
            );
        }
    }
}

#[test]
fn m1_kernel_is_z_sigma() {
    let sol = sigma0();
    let m1 = eigen_solve(&sol.curve, 1, 2, DEFAULT_GRID).unwrap();
    assert!(m1_kernel_shape_error(&sol.curve, &m1).unwrap() < 1e-4);
    assert!(kernel_residual_m1(&sol.curve).unwrap() < 1e-5);
    let rs = sol.curve.resample_uniform(4000);
    let wrong: Vec<f64> = rs.phi.iter().map(|p| p.cos()).collect();
    assert!(mode_residual_on(&rs, &wrong, 1).unwrap() > 1.0);
}

/// `sin⁴` bump on `[a, b]`, zero outside.
fn bump(t: f64, a: f64, b: f64, k: f64) -> f64 {
    if t <= a || t >= b {
        return 0.0;
    }
    let x = (t - a) / (b - a);
    (PI * x).sin().powi(4) * (k * PI * x).cos()
}

#[test]
fn jacobi_operator_self_adjoint_in_weight() {
    let curve = sigma0().curve;
    let rs = curve.resample_uniform(4000);
    let (a, b) = (0.1 * curve.ell(), 0.9 * curve.ell());
    let u: Vec<f64> = rs.tau.iter().map(|&t| bump(t, a, b, 1.0)).collect();
    let v: Vec<f64> = rs.tau.iter().map(|&t| bump(t, a, b, 3.0)).collect();
    let weight = |i: usize| rs.r[i] / (rs.z[i] * rs.z[i]);
    let mut uv = 0.0;
    let mut vu = 0.0;
    let mut norm = 0.0;
    for i in rs.window(0.02, 0.98) {
        uv += weight(i) * v[i] * rs.apply_jacobi(&u, i);
        vu += weight(i) * u[i] * rs.apply_jacobi(&v, i);
        norm += (weight(i) * v[i] * rs.apply_jacobi(&u, i)).abs();
    }
    assert!((uv - vu).abs() < 1e-8 * norm, "{uv} vs {vu}");

    let op = assemble_mode(&curve, 2, 300).unwrap();
    let x: Vec<f64> = (0..op.dim()).map(|k| (k as f64 * 0.37).sin()).collect();
    let y: Vec<f64> = (0..op.dim()).map(|k| (k as f64 * 0.11).cos()).collect();
    let (ax, ay) = (op.apply(&x), op.apply(&y));
    let lhs: f64 = y.iter().zip(&ax).map(|(a, b)| a * b).sum();
    let rhs: f64 = x.iter().zip(&ay).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
}

#[test]
fn coarse_grid_rejected() {
    let curve = sigma0().curve;
    assert!(matches!(
        eigen_solve(&curve, 0, 2, 50),
        Err(Error::GridTooCoarse { .. })
    ));
}

#[test]
fn certificate_passes_and_is_scale_invariant() {
    let settings = IntegratorSettings::default();
    let (sol, cert) = certify_circle(
        &BoundaryCircle::new(0.5, -3.0).unwrap(),
        &settings,
        DEFAULT_GRID,
    )
    .unwrap();
    assert_eq!(cert.verdict, Verdict::Pass, "{:?}", cert.diagnostics);
    assert_eq!(cert.kernel_dim_even, 1);
    assert!((cert.c_o - sol.params.c_o()).abs() == 0.0);
    for mu in [0.5, 2.0] {
        let (_, scaled) = certify_circle(
            &BoundaryCircle::new(0.5 * mu, -3.0 * mu).unwrap(),
            &settings,
            DEFAULT_GRID,
        )
        .unwrap();
        assert_eq!(scaled.verdict, cert.verdict);
        assert_eq!(scaled.conditions, cert.conditions);
        assert!((scaled.m2_gap * mu.powi(4) - cert.m2_gap).abs() < 1e-8 * cert.m2_gap);
        assert!(
            (scaled.h_prime_boundary / mu - cert.h_prime_boundary).abs()
                < 1e-8 * cert.h_prime_boundary.abs()
        );
    }
}

#[test]
fn certificate_not_applicable_when_inadmissible() {
    let curve = integrate_profile(
        &ModelParams::new(2.0, -0.2).unwrap(),
        &StopCondition::arc_length(0.3),
        &IntegratorSettings::default(),
    )
    .unwrap();
    let cert = certify(&CertificateEvidence {
        curve: Some(curve),
        grid: DEFAULT_GRID,
        ..CertificateEvidence::default()
    })
    .unwrap();
    assert_eq!(cert.verdict, Verdict::NotApplicable);
}

#[test]
fn certificate_lists_missing_evidence() {
    let sol = sigma0();
    let lin = solve_h(&sol.curve).unwrap();
    let err = certify(&CertificateEvidence {
        curve: Some(sol.curve.clone()),
        linearized: Some(lin),
        grid: DEFAULT_GRID,
        ..CertificateEvidence::default()
    })
    .unwrap_err();
    match err {
        Error::IncompleteEvidence(missing) => {
            assert!(missing.iter().any(|m| m == "spectrum m=2"));
            assert!(missing.iter().any(|m| m.contains("family")));
        }
        other => panic!("{other:?}"),
    }
}
