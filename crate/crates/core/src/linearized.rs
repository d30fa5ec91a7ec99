//! Linearization about a tangential disc.
//!
//! Along a `Σ₀` profile the Jacobi operator acting on axially symmetric
//! functions is, in the arc length `tau` from the axis,
//!
//! ```text
//! P[u] = u'' − (cos φ / r) u' + (2 sin φ / z) u' + V u,   V = ‖dν‖² − 2 cos²φ / z²
//! ```
//!
//! This module solves `P[ψ] = 0` (the axisymmetric kernel candidate, regular on
//! the axis) and `P[h] = −2` with `h = 0` on the boundary, whose boundary slope
//! `h_ς(0)` decides transversality.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, Trajectory};
use crate::profile::{
    axis_seed, geometry_of, integrate_profile, phi_sigma, IntegratorSettings, ModelParams,
    ProfileCurve, StopCondition, DEFAULT_RESAMPLE,
};
use crate::resample::Resample;
use crate::shooting::{shoot_family_member, BoundaryCircle, Sigma0Solution};

/// `‖dν‖² − 2 cos²φ / z²` at an interior point.
pub fn potential_v(c_o: f64, r: f64, z: f64, phi: f64) -> f64 {
    let ps = phi_sigma(c_o, r, z, phi);
    let sr = phi.sin() / r;
    let cz = phi.cos() / z;
    sr * sr + ps * ps - 2.0 * cz * cz
}

/// Axis limit of [`potential_v`]: `2(1/z_o + c_o)² − 2/z_o²`.
pub fn potential_v_axis(params: &ModelParams) -> f64 {
    let a = params.axis_slope();
    2.0 * a * a - 2.0 / (params.z_o() * params.z_o())
}

/// Right-hand side of the profile system extended by `h` and `w = h_ς`,
/// differentiated in the boundary-oriented arc length `ς`.
///
/// `state = [r, z, φ, h, w]`.
pub fn extended_rhs(state: &[f64; 5], c_o: f64) -> Result<[f64; 5]> {
    let [r, z, phi, h, w] = *state;
    if r == 0.0 {
        return Err(Error::AxisSingularity);
    }
    let (s, c) = phi.sin_cos();
    let ps = phi_sigma(c_o, r, z, phi);
    let v = potential_v(c_o, r, z, phi);
    Ok([c, s, ps, w, -v * h - (c / r - 2.0 * s / z) * w - 2.0])
}

/// Coefficients of the weighted Sturm–Liouville form of `P`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearizedCoeffs {
    pub tau: Vec<f64>,
    /// `U = V / z²`.
    pub potential: Vec<f64>,
    /// `r / z²`.
    pub weight: Vec<f64>,
    /// `r / z²`, the flux coefficient.
    pub p_coeff: Vec<f64>,
}

pub fn linearized_coeffs(curve: &ProfileCurve) -> LinearizedCoeffs {
    let params = curve.params();
    let n = curve.samples().len();
    let mut out = LinearizedCoeffs {
        tau: Vec::with_capacity(n),
        potential: Vec::with_capacity(n),
        weight: Vec::with_capacity(n),
        p_coeff: Vec::with_capacity(n),
    };
    for s in curve.samples() {
        let v = if s.r == 0.0 {
            potential_v_axis(params)
        } else {
            potential_v(params.c_o(), s.r, s.z, s.phi)
        };
        let z2 = s.z * s.z;
        out.tau.push(s.tau);
        out.potential.push(v / z2);
        out.weight.push(s.r / z2);
        out.p_coeff.push(s.r / z2);
    }
    out
}

/// Profile together with the regular homogeneous solution `g` and the
/// particular solution `p` of `P[p] = −2`, both even about the axis.
/// Layout: `[r, z, φ, g, g', p, p']`, primes in `tau`.
#[derive(Debug)]
struct LinearRun {
    params: ModelParams,
    tau0: f64,
    ell: f64,
    traj: Trajectory<7>,
}

impl LinearRun {
    fn new(curve: &ProfileCurve) -> Result<Self> {
        let params = *curve.params();
        let settings = curve.settings();
        let tau0 = curve.tau0();
        let ell = curve.ell();
        let seed = axis_seed(&params, tau0)?;
        let v0 = potential_v_axis(&params);
        let g2 = -v0 / 4.0;
        let p2 = -0.5;
        let y0 = [
            seed.r,
            seed.z,
            seed.phi,
            1.0 + g2 * tau0 * tau0,
            2.0 * g2 * tau0,
            p2 * tau0 * tau0,
            2.0 * p2 * tau0,
        ];
        let c_o = params.c_o();
        let rhs = move |_t: f64, y: &[f64; 7]| {
            let (r, z, phi) = (y[0], y[1], y[2]);
            let (s, c) = phi.sin_cos();
            let v = potential_v(c_o, r, z, phi);
            let drift = c / r - 2.0 * s / z;
            [
                -c,
                -s,
                2.0 * c / z + s / r - 2.0 * c_o,
                y[4],
                -v * y[3] + drift * y[4],
                y[6],
                -v * y[5] + drift * y[6] - 2.0,
            ]
        };
        let traj = ode::integrate(rhs, tau0, y0, ell, &settings.ode_options(&params), &[], 0.0)?;
        Ok(Self {
            params,
            tau0,
            ell,
            traj,
        })
    }

    /// `[g, g', p, p']` at `tau`.
    fn linear_at(&self, tau: f64) -> [f64; 4] {
        if tau < self.tau0 {
            let g2 = -potential_v_axis(&self.params) / 4.0;
            return [1.0 + g2 * tau * tau, 2.0 * g2 * tau, -0.5 * tau * tau, -tau];
        }
        let y = self.traj.eval(tau);
        [y[3], y[4], y[5], y[6]]
    }
}

/// Solutions of the linearized problem on the samples of a profile.
#[derive(Debug, Clone, Serialize)]
pub struct LinearizedSolution {
    pub tau: Vec<f64>,
    /// Regular solution of `P[ψ] = 0`, normalized to 1 on the boundary.
    pub psi: Vec<f64>,
    pub h: Vec<f64>,
    /// `h_ς = −dh/dτ`.
    pub w: Vec<f64>,
    /// `h_ς` at the boundary.
    pub h_prime_boundary: f64,
    /// Weight of the homogeneous solution in `h = p + α g`.
    pub alpha: f64,
    /// Boundary value of the homogeneous solution normalized to 1 on the axis.
    pub psi_raw_boundary: f64,
    #[serde(skip)]
    run: Option<Arc<LinearRun>>,
}

impl LinearizedSolution {
    /// `h` at any `tau` in `[0, ell]`.
    pub fn h_at(&self, tau: f64) -> f64 {
        let l = self
            .run
            .as_ref()
            .expect("dense solution attached")
            .linear_at(tau);
        l[2] + self.alpha * l[0]
    }
}

fn boundary_check(g_boundary: f64, g_max: f64) -> Result<()> {
    if !(g_boundary.abs() > 1e-10 * g_max) {
        return Err(Error::BoundaryValueVanishes(g_boundary));
    }
    Ok(())
}

/// Regular axisymmetric solution of `P[ψ] = 0` on the profile samples,
/// normalized to `ψ = 1` on the boundary.
pub fn solve_axisymmetric_kernel(curve: &ProfileCurve) -> Result<Vec<f64>> {
    Ok(solve_h(curve)?.psi)
}

/// Solves `P[h] = −2`, `h = 0` on the boundary, regular on the axis.
pub fn solve_h(curve: &ProfileCurve) -> Result<LinearizedSolution> {
    let run = LinearRun::new(curve)?;
    let taus: Vec<f64> = curve.samples().iter().map(|s| s.tau).collect();
    let vals: Vec<[f64; 4]> = taus.iter().map(|&t| run.linear_at(t)).collect();
    let end = run.linear_at(run.ell);
    let g_max = vals.iter().fold(0.0f64, |m, v| m.max(v[0].abs()));
    boundary_check(end[0], g_max)?;
    let alpha = -end[2] / end[0];
    let psi = vals.iter().map(|v| v[0] / end[0]).collect();
    let h = vals.iter().map(|v| v[2] + alpha * v[0]).collect();
    let w = vals.iter().map(|v| -(v[3] + alpha * v[1])).collect();
    let h_prime_boundary = -(end[3] + alpha * end[1]);
    Ok(LinearizedSolution {
        tau: taus,
        psi,
        h,
        w,
        h_prime_boundary,
        alpha,
        psi_raw_boundary: end[0],
        run: Some(Arc::new(run)),
    })
}

/// `h = (q_b ψ − q)/c_o` from the support function `q` and the kernel `ψ`
/// normalized to 1 on the boundary, where `q = q_b`.
pub fn h_from_support(curve: &ProfileCurve, psi: &[f64]) -> Result<Vec<f64>> {
    let samples = curve.samples();
    if psi.len() != samples.len() {
        return Err(Error::InvalidParams(format!(
            "psi has {} samples, curve has {}",
            psi.len(),
            samples.len()
        )));
    }
    let params = curve.params();
    let q_b = geometry_of(params, samples.last().unwrap()).support;
    let psi_b = *psi.last().unwrap();
    Ok(samples
        .iter()
        .zip(psi)
        .map(|(s, &p)| (q_b * p - psi_b * geometry_of(params, s).support) / params.c_o())
        .collect())
}

/// Interior sup of `|P[ν₃] + 2ν₃/z²|` with `ν₃ = −cos φ` on a uniform resample.
pub fn residual_pnu3(curve: &ProfileCurve) -> Result<f64> {
    let rs = curve.resample_uniform(DEFAULT_RESAMPLE);
    let nu3: Vec<f64> = rs.phi.iter().map(|p| -p.cos()).collect();
    residual_pnu3_on(&rs, &nu3)
}

/// As [`residual_pnu3`] with explicitly supplied `ν₃` samples.
pub fn residual_pnu3_on(rs: &Resample, nu3: &[f64]) -> Result<f64> {
    rs.require_points(16)?;
    if nu3.len() != rs.len() {
        return Err(Error::TooFewSamples {
            got: nu3.len(),
            need: rs.len(),
        });
    }
    Ok(rs
        .window(0.02, 0.98)
        .map(|i| (rs.apply_jacobi(nu3, i) + 2.0 * nu3[i] / (rs.z[i] * rs.z[i])).abs())
        .fold(0.0, f64::max))
}

/// Outcome of comparing the fixed-boundary family with `h`.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyDerivativeCheck {
    pub delta: f64,
    /// Relative sup error of the central difference at `delta`.
    pub rel_error: f64,
    /// Same at `delta / 2`.
    pub rel_error_half: f64,
    pub observed_order: f64,
    /// Describes the parameterization and normal used for the comparison.
    pub sign_convention: String,
    pub sample_count: usize,
}

pub const SIGN_CONVENTION: &str = "c = c_o + t; normal (sin phi, -cos phi) in the (r, z) plane; \
d/dt of the normal displacement at fixed boundary-relative arc length equals +h";

/// Relative sup error between the central difference of the family at
/// `c_o ± delta` and `h`, sampled at matched boundary-relative arc length.
fn central_difference_error(
    sigma0: &Sigma0Solution,
    lin: &LinearizedSolution,
    delta: f64,
    settings: &IntegratorSettings,
    sigmas: &[f64],
) -> Result<f64> {
    let c0 = sigma0.params.c_o();
    let (plus, minus) = rayon::join(
        || shoot_family_member(c0 + delta, sigma0, settings),
        || shoot_family_member(c0 - delta, sigma0, settings),
    );
    let (plus, minus) = (plus?, minus?);
    let base = &sigma0.curve;
    let ell0 = base.ell();
    let mut worst: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    for &sigma in sigmas {
        let x = base.state_at(ell0 - sigma)?;
        let normal = (x.phi.sin(), -x.phi.cos());
        let disp = |m: &crate::shooting::FamilyMember| -> Result<f64> {
            let y = m.curve.state_at(m.curve.ell() - sigma)?;
            Ok((y.r - x.r) * normal.0 + (y.z - x.z) * normal.1)
        };
        let d = (disp(&plus)? - disp(&minus)?) / (2.0 * delta);
        let h = lin.h_at(ell0 - sigma);
        worst = worst.max((d - h).abs());
        h_max = h_max.max(h.abs());
    }
    Ok(worst / h_max)
}

/// First-order check of the family through `Σ₀` against `h`, with the
/// observed order from `delta` and `delta / 2`.
pub fn family_derivative_check(
    sigma0: &Sigma0Solution,
    delta: f64,
    settings: &IntegratorSettings,
) -> Result<FamilyDerivativeCheck> {
    if !(delta > 0.0 && delta < sigma0.params.c_o()) {
        return Err(Error::InvalidParams(format!(
            "delta must be in (0, c_o), got {delta}"
        )));
    }
    let lin = solve_h(&sigma0.curve)?;
    let c0 = sigma0.params.c_o();
    // members at c0 ± delta are shorter or longer than Σ₀; compare where all exist
    let reach = [c0 - delta, c0 + delta]
        .iter()
        .map(|&c| shoot_family_member(c, sigma0, settings).map(|m| m.curve.ell()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(sigma0.curve.ell(), f64::min);
    let n = 400;
    let sigmas: Vec<f64> = (0..=n).map(|k| reach * k as f64 / n as f64).collect();
    let rel_error = central_difference_error(sigma0, &lin, delta, settings, &sigmas)?;
    let rel_error_half = central_difference_error(sigma0, &lin, 0.5 * delta, settings, &sigmas)?;
    Ok(FamilyDerivativeCheck {
        delta,
        rel_error,
        rel_error_half,
        observed_order: (rel_error / rel_error_half).log2(),
        sign_convention: SIGN_CONVENTION.to_string(),
        sample_count: sigmas.len(),
    })
}

/// One row of the transversality table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub c_o: f64,
    pub z_o: f64,
    pub h_prime_boundary: f64,
    /// Same quantity with axis offset and tolerances halved.
    pub h_prime_boundary_refined: f64,
    pub relative_change: f64,
    pub ell: f64,
}

pub const TABLE1_Z: [f64; 5] = [-0.55, -0.6, -0.7, -0.9, -1.2];

fn table_row(c_o: f64, z_o: f64, settings: &IntegratorSettings) -> Result<TableRow> {
    let params = ModelParams::new(c_o, z_o)?;
    if !params.sigma0_admissible() {
        return Err(Error::NotAdmissible(c_o * z_o));
    }
    let stop = StopCondition::horizontal_tangent();
    let curve = integrate_profile(&params, &stop, settings)?;
    let coarse = solve_h(&curve)?.h_prime_boundary;
    let fine_settings = settings.tightened(2.0);
    let fine_curve = integrate_profile(&params, &stop, &fine_settings)?;
    let fine = solve_h(&fine_curve)?.h_prime_boundary;
    Ok(TableRow {
        c_o,
        z_o,
        h_prime_boundary: coarse,
        h_prime_boundary_refined: fine,
        relative_change: ((fine - coarse) / fine).abs(),
        ell: curve.ell(),
    })
}

/// `h_ς(0)` along `Σ₀` profiles for each axis height, computed in parallel.
pub fn transversality_table(
    c_o: f64,
    z_values: &[f64],
    settings: &IntegratorSettings,
) -> Result<Vec<TableRow>> {
    z_values
        .par_iter()
        .map(|&z| table_row(c_o, z, settings))
        .collect()
}

/// Family derivative check for the `Σ₀` spanning `circle`.
pub fn family_derivative_check_for(
    circle: &BoundaryCircle,
    delta: f64,
    settings: &IntegratorSettings,
) -> Result<FamilyDerivativeCheck> {
    let sigma0 = crate::shooting::shoot_sigma0(
        circle,
        None,
        settings,
        &crate::shooting::ShootingOptions::default(),
    )?;
    family_derivative_check(&sigma0, delta, settings)
}
