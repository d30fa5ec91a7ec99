//! Regenerates the figure and table data sets through the command-line recipes.
//!
//! ```text
//! cargo run --example recipes -- [out_dir]
//! ```

use std::path::PathBuf;

use membrane_bifurcation::cli::{run_recipe, RECIPES};

fn main() -> membrane_bifurcation::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("membrane-out/recipes"));
    for name in RECIPES {
        let record = run_recipe(name, &root.join(name))?;
        println!("{name}: {} files", record.artifacts.len());
        for (key, value) in &record.derived {
            println!("  {key} = {value}");
        }
    }
    Ok(())
}
