//! Solves the axisymmetric linear problems on one tangential profile: the
//! kernel `ψ` and the function `h`, and cross-checks `h` against the closed form
//! built from the support function.

use membrane_bifurcation::linearized::{h_from_support, residual_pnu3, solve_h};
use membrane_bifurcation::{integrate_profile, IntegratorSettings, ModelParams, StopCondition};

fn main() -> membrane_bifurcation::Result<()> {
    let params = ModelParams::new(2.0, -0.6)?;
    let curve = integrate_profile(
        &params,
        &StopCondition::horizontal_tangent(),
        &IntegratorSettings::default(),
    )?;
    let lin = solve_h(&curve)?;
    let closed = h_from_support(&curve, &lin.psi)?;
    let h_max = lin.h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = lin
        .h
        .iter()
        .zip(&closed)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    println!("h_s(0)                 {:.12}", lin.h_prime_boundary);
    println!("alpha                  {:.12}", lin.alpha);
    println!("psi before scaling     {:.12}", lin.psi_raw_boundary);
    println!("support form, rel diff {:.2e}", diff / h_max);
    println!("P[nu3] + 2 nu3 / z^2   {:.2e}", residual_pnu3(&curve)?);

    println!("\n  tau       psi         h");
    let step = (lin.tau.len() - 1) / 10;
    for k in (0..lin.tau.len()).step_by(step.max(1)) {
        println!("  {:.5}  {:+.7}  {:+.7}", lin.tau[k], lin.psi[k], lin.h[k]);
    }
    Ok(())
}
