//! Finds the tangential disc spanning the circle `R = 0.5` at height `Z = -3`
//! and checks that the solve commutes with rescaling.

use membrane_bifurcation::shooting::{shoot_sigma0, BoundaryCircle, ShootingOptions};
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let settings = IntegratorSettings::default();
    let opts = ShootingOptions::default();
    let circle = BoundaryCircle::new(0.5, -3.0)?;
    let sol = shoot_sigma0(&circle, None, &settings, &opts)?;
    println!("c_o            {:.12}", sol.params.c_o());
    println!("z_o            {:.12}", sol.params.z_o());
    println!("phi(boundary)  {:.2e}", sol.boundary_phi);
    println!("mismatch       {:.2e}", sol.match_residual);
    println!("iterations     {}", sol.iterations);
    println!("grid restart   {}", sol.used_grid_restart);

    for mu in [0.5, 2.0] {
        let scaled = shoot_sigma0(&circle.scaled(mu)?, None, &settings, &opts)?;
        println!(
            "mu = {mu}: c_o * mu = {:.12}, z_o / mu = {:.12}",
            scaled.params.c_o() * mu,
            scaled.params.z_o() / mu
        );
    }
    Ok(())
}
