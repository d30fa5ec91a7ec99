//! Runs the full bifurcation check on the disc spanning `(0.5, -3)` and prints
//! the certificate as JSON.

use membrane_bifurcation::shooting::BoundaryCircle;
use membrane_bifurcation::spectral::{certify_circle, DEFAULT_GRID};
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let circle = BoundaryCircle::new(0.5, -3.0)?;
    let (_, cert) = certify_circle(&circle, &IntegratorSettings::default(), DEFAULT_GRID)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&cert).expect("serializable")
    );
    Ok(())
}
