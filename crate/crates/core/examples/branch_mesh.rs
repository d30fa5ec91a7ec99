//! Writes OBJ meshes of the tangential disc and of the first-order bifurcating
//! branch `X + s z_ς cos θ ν` for `s = ±0.25` into a directory.
//!
//! ```text
//! cargo run --example branch_mesh -- [out_dir]
//! ```

use std::path::PathBuf;

use membrane_bifurcation::export::{mesh_obj, write_text};
use membrane_bifurcation::shooting::{shoot_sigma0, BoundaryCircle, ShootingOptions};
use membrane_bifurcation::surfaces::{branch_linear_mesh, revolve};
use membrane_bifurcation::IntegratorSettings;

fn main() -> membrane_bifurcation::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("membrane-out/branch_mesh"));
    let circle = BoundaryCircle::new(0.5, -3.0)?;
    let sol = shoot_sigma0(
        &circle,
        None,
        &IntegratorSettings::default(),
        &ShootingOptions::default(),
    )?;
    let curve = sol.curve.with_uniform_samples(120);

    let base = revolve(&curve, 48)?;
    write_text(&out.join("disc.obj"), &mesh_obj(&base))?;
    for (name, s) in [("plus", 0.25), ("minus", -0.25)] {
        let mesh = branch_linear_mesh(&curve, s, 48)?;
        write_text(&out.join(format!("branch_{name}.obj")), &mesh_obj(&mesh))?;
        println!(
            "s = {s:+}: {} vertices, {} faces, area {:.6}",
            mesh.vertices.len(),
            mesh.faces.len(),
            mesh.area()
        );
    }
    println!("disc area {:.6}; meshes in {}", base.area(), out.display());
    Ok(())
}
