//! Problem instances: seeded shift/rotate/offset transforms that change a
//! problem's coordinates but not its difficulty, and how the known optimum
//! moves with them.
//!
//! Run with: `cargo run --example instance_transforms`

use somogsa::problems::{self, GradMode, InstanceSpec};

fn main() -> somogsa::Result<()> {
    let base = problems::rastrigin(2);
    let (x0, f0) = base.known_optimum.clone().unwrap();
    println!("base {}: optimum f({x0:?}) = {f0}", base.id);

    for seed in 1..=3u64 {
        let spec = InstanceSpec::from_seed(seed, base.dim);
        let inst = problems::apply_instance(&base, &spec)?;
        let (x_star, f_star) = inst.known_optimum.clone().unwrap();
        let check = inst.evaluate(&x_star)?;
        println!(
            "instance seed {seed}: shift {:?}, value offset {:+.3}",
            spec.shift.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(),
            spec.value_offset
        );
        println!(
            "  transformed optimum at {:?}, f = {f_star:.6} (re-evaluated: {check:.6})",
            x_star.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
        );
        println!("  rotation orthonormality defect: {:.2e}", spec.orthonormality_defect());

        // the chain-rule gradient still matches finite differences
        let x = [0.7, -1.2];
        let ga = inst.gradient(&x, GradMode::Analytic)?.g;
        let gf = inst.gradient(&x, GradMode::CentralFd { h: 1e-5 })?.g;
        let err = ga
            .iter()
            .zip(&gf)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        println!("  analytic vs finite-difference gradient at {x:?}: |diff| = {err:.2e}");
    }
    Ok(())
}
