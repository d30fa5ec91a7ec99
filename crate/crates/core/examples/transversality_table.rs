//! Boundary derivative `h_ς(0)` of the solution of `P[h] = -2`, `h = 0` on the
//! boundary, for `c_o = 2` and several axis heights, with its change under
//! halved tolerances.

use membrane_bifurcation::linearized::{transversality_table, TABLE1_Z};
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let rows = transversality_table(2.0, &TABLE1_Z, &IntegratorSettings::default())?;
    println!("  z_o     h_s(0)            refined           rel. change");
    for r in rows {
        println!(
            "  {:+.2}   {:+.12}  {:+.12}  {:.1e}",
            r.z_o, r.h_prime_boundary, r.h_prime_boundary_refined, r.relative_change
        );
    }
    Ok(())
}
