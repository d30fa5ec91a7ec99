//! Sweeps the fixed-boundary family through the circle `(0.5, -3)` and prints
//! the contact angle at the boundary, which changes sign at the tangential disc.

use membrane_bifurcation::shooting::{family_sweep, BoundaryCircle};
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let circle = BoundaryCircle::new(0.5, -3.0)?;
    let sweep = family_sweep(&circle, 1.2, 1.8, 13, &IntegratorSettings::default())?;
    println!("tangential disc at c_o = {:.9}", sweep.sigma0.params.c_o());
    println!("\n  c      z_o           contact angle   length");
    for m in sweep.members() {
        println!(
            "  {:.3}  {:+.9}  {:+.9}    {:.6}",
            m.c,
            m.z_o,
            m.contact_angle,
            m.curve.ell()
        );
    }
    for (c, why) in sweep.failures() {
        println!("  {c:.3}  failed: {why}");
    }
    Ok(())
}
