//! Gradient-field heatmap export: grid CSV, basin report, and a solver
//! trace overlay for the bimodal test function.
//!
//! Run with: `cargo run --example heatmap_export`

use somogsa::biobj::BiObjectiveProblem;
use somogsa::landscape::{self, GridSpec};
use somogsa::mogsa::{self, MogsaConfig};
use somogsa::problems::{self, DEFAULT_SPHERE_CENTER};

fn main() -> somogsa::Result<()> {
    let bi = BiObjectiveProblem::new(problems::bimodal_example(), DEFAULT_SPHERE_CENTER.to_vec())?;

    let spec = GridSpec { resolution: 151, ..GridSpec::default() };
    let grid = landscape::compute_field(&bi, &spec)?;
    println!("computed {}x{} grid", grid.resolution, grid.resolution);
    for b in &grid.basins {
        println!(
            "  basin {}: {} sink cells, {} cells drain into it, ridge_free = {}",
            b.id, b.sink_cells, b.cells, b.ridge_free
        );
    }

    let dir = std::env::temp_dir();
    let grid_path = dir.join("bimodal_grid.csv");
    landscape::write_grid_csv(&grid, std::fs::File::create(&grid_path)?)?;
    let basins_path = dir.join("bimodal_basins.json");
    landscape::write_basin_report(&grid, std::fs::File::create(&basins_path)?)?;

    // overlay: the path of a run that crosses the ridge
    let res = mogsa::run(&bi, &[2.5, 2.0], &MogsaConfig::default(), 200_000)?;
    let overlay_path = dir.join("bimodal_trace_overlay.csv");
    landscape::write_trace_overlay_csv(&res.trace, std::fs::File::create(&overlay_path)?)?;

    println!("grid:    {}", grid_path.display());
    println!("basins:  {}", basins_path.display());
    println!("overlay: {}", overlay_path.display());
    Ok(())
}
