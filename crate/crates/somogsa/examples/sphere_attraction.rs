//! The helper objective as a landmark: on highly multimodal Rastrigin the
//! solver keeps archiving the helper-sphere optimum exactly, because the
//! final exploration step's segment contains the sphere center and the
//! projection onto it is closed-form.
//!
//! Run with: `cargo run --example sphere_attraction`

use somogsa::biobj::BiObjectiveProblem;
use somogsa::mogsa::{self, Classification, MogsaConfig};
use somogsa::problems::{self, DEFAULT_SPHERE_CENTER};

fn main() -> somogsa::Result<()> {
    let starts = [[3.0, 1.0], [2.0, 4.0], [-3.0, 2.0], [2.5, 4.5]];
    for start in starts {
        let bi = BiObjectiveProblem::new(problems::rastrigin(2), DEFAULT_SPHERE_CENTER.to_vec())?;
        let res = mogsa::run(&bi, &start, &MogsaConfig::default(), 400_000)?;
        let sphere_hit = res
            .archive
            .iter()
            .filter(|e| e.classification == Classification::SphereOptimum)
            .map(|e| {
                e.x.iter()
                    .zip(DEFAULT_SPHERE_CENTER)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        println!(
            "start {start:?}: {} archive entries, nearest sphere-optimum entry {:.2e} from the center",
            res.archive.len(),
            sphere_hit
        );
        let candidates: Vec<f64> = res
            .archive
            .iter()
            .filter(|e| e.classification == Classification::CandidateOptimum)
            .map(|e| e.f1)
            .collect();
        println!("  candidate optima values: {candidates:?}");
    }
    Ok(())
}
