//! Integrates the generating curve for `c_o = 2`, `z_o = -0.6` up to its
//! horizontal tangent and prints shape and consistency diagnostics.
//!
//! ```text
//! cargo run --example trace_profile -- [c_o] [z_o]
//! ```

use membrane_bifurcation::{
    axis_curvature_extrapolated, energy, first_integral_residual, fourth_order_residual,
    integrate_profile, shape_diagnostics, IntegratorSettings, ModelParams, StopCondition,
};

fn main() -> membrane_bifurcation::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let c_o = args.first().copied().unwrap_or(2.0);
    let z_o = args.get(1).copied().unwrap_or(-0.6);

    let params = ModelParams::new(c_o, z_o)?;
    let settings = IntegratorSettings::default();
    let curve = integrate_profile(&params, &StopCondition::horizontal_tangent(), &settings)?;
    let end = curve.endpoint();
    println!("c_o = {c_o}, z_o = {z_o}");
    println!("arc length        {:.12}", curve.ell());
    println!("boundary (r, z)   ({:.12}, {:.12})", end.r, end.z);
    println!("samples           {}", curve.samples().len());

    let diag = shape_diagnostics(&curve)?;
    println!("convex            {}", diag.convex);
    if let Some(r) = diag.vertical_tangent_r {
        println!(
            "vertical tangent  r = {r:.9} (bound {:.9})",
            1.0 / params.axis_slope()
        );
    }

    println!(
        "axis curvature    {:.12} (expected {:.12})",
        axis_curvature_extrapolated(&params, &settings)?,
        params.axis_slope()
    );
    println!("first integral    {:.2e}", first_integral_residual(&curve));
    println!("fourth order      {:.2e}", fourth_order_residual(&curve)?);
    println!("energy            {:.12}", energy(&curve));

    println!("\n  tau        r          z          phi        H");
    for tau in (0..=8).map(|k| curve.ell() * k as f64 / 8.0) {
        let s = curve.state_at(tau)?;
        let g = curve.geometry_at(tau)?;
        println!(
            "  {:.6}  {:.6}  {:.6}  {:.6}  {:.6}",
            tau, s.r, s.z, s.phi, g.mean_curvature
        );
    }
    Ok(())
}
