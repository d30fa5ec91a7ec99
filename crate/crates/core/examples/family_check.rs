//! Compares the central difference of the fixed-boundary family at the
//! tangential disc with the linearized solution `h`.

use membrane_bifurcation::linearized::family_derivative_check_for;
use membrane_bifurcation::shooting::BoundaryCircle;
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let circle = BoundaryCircle::new(0.5, -3.0)?;
    let settings = IntegratorSettings::default();
    for delta in [1e-2, 1e-3] {
        let check = family_derivative_check_for(&circle, delta, &settings)?;
        println!(
            "delta = {delta:.0e}: rel. error {:.3e}, at delta/2 {:.3e}, order {:.3}",
            check.rel_error, check.rel_error_half, check.observed_order
        );
    }
    Ok(())
}
