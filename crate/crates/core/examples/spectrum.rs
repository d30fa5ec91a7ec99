//! Lowest eigenvalues of the Fourier modes `m = 0, 1, 2` of the linearized
//! operator on the tangential disc spanning `(0.5, -3)`.

use membrane_bifurcation::shooting::{shoot_sigma0, BoundaryCircle, ShootingOptions};
use membrane_bifurcation::spectral::{eigen_solve_modes, m1_kernel_shape_error, DEFAULT_GRID};
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let circle = BoundaryCircle::new(0.5, -3.0)?;
    let sol = shoot_sigma0(
        &circle,
        None,
        &IntegratorSettings::default(),
        &ShootingOptions::default(),
    )?;
    let spectra = eigen_solve_modes(&sol.curve, 2, 4, DEFAULT_GRID)?;
    for e in &spectra {
        let values: Vec<String> = e.eigenvalues.iter().map(|l| format!("{l:+.9}")).collect();
        println!("m = {}: {}", e.m, values.join("  "));
    }
    let m1 = spectra.iter().find(|e| e.m == 1).expect("m = 1 solved");
    println!(
        "m = 1 eigenfunction vs z_s: {:.2e}",
        m1_kernel_shape_error(&sol.curve, m1)?
    );
    Ok(())
}
