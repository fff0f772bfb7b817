//! The headline capability: a local search trapped in the wrong basin is
//! rescued by multiobjectivization.
//!
//! Plain Nelder-Mead started at (2.5, 2) on the bimodal test function
//! converges to the shallow local minimum. The combined-gradient solver,
//! started at the same point with the same objective, slides along the
//! locally efficient set, detects the ridge, and descends into the basin of
//! the global minimum.
//!
//! Run with: `cargo run --example bimodal_rescue`

use somogsa::biobj::BiObjectiveProblem;
use somogsa::mogsa::{self, MogsaConfig};
use somogsa::neldermead::{self, NmConfig};
use somogsa::problems::{self, DEFAULT_SPHERE_CENTER};

fn main() -> somogsa::Result<()> {
    let problem = problems::bimodal_example();
    let start = [2.5, 2.0];
    let (x_star, f_star) = problem.known_optimum.clone().unwrap();
    println!("problem: {}, global optimum f({x_star:?}) = {f_star:.6}", problem.id);

    let nm = neldermead::minimize(&problem, &start, &NmConfig::default(), 200_000)?;
    println!(
        "nelder-mead from {start:?}: f = {:.6} at {:?} ({} evals) -- stuck in the local trap",
        nm.f_best, nm.x_best, nm.evals
    );

    let bi = BiObjectiveProblem::new(problem, DEFAULT_SPHERE_CENTER.to_vec())?;
    let res = mogsa::run(&bi, &start, &MogsaConfig::default(), 200_000)?;
    println!(
        "gradient sliding from {start:?}: terminated by {:?} after {} evaluations",
        res.terminated_by, res.evals_f1
    );
    for e in &res.archive {
        println!("  archived {:?} at {:?} with f1 = {:.6}", e.classification, e.x, e.f1);
    }
    let (bx, bf) = res.best_f1.unwrap();
    println!("best value seen: f = {bf:.6} at {bx:?}");
    assert!(bf <= -4.85, "the rescue should reach the global basin");
    Ok(())
}
