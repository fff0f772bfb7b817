//! A small fixed-target benchmarking campaign and its runtime ECDF:
//! gradient sliding versus the Nelder-Mead baseline on two rugged
//! problems.
//!
//! Run with: `cargo run --example ecdf_campaign`

use somogsa::bench::{self, Algorithm, CampaignConfig, TargetList};

fn main() -> somogsa::Result<()> {
    let targets = TargetList::standard();
    let base = CampaignConfig {
        problems: vec!["rastrigin".into(), "gallagher".into()],
        instance_seeds: vec![1, 2],
        algorithms: vec![Algorithm::Mogsa],
        budget_per_dim: 100_000,
        starts: None,
        sphere_center: None,
    };

    for alg in [Algorithm::Mogsa, Algorithm::NelderMead] {
        let cfg = CampaignConfig { algorithms: vec![alg], ..base.clone() };
        let logs = bench::run_campaign(&cfg, &targets)?;
        let grid = bench::eval_grid(cfg.budget_per_dim);
        let props = bench::ecdf_proportions(&logs, targets.len(), &grid);
        let auc = props.iter().sum::<f64>() / props.len() as f64;
        println!(
            "{alg}: {} runs, final proportion of (run, target) pairs solved: {:.3}, mean height {auc:.3}",
            logs.len(),
            props.last().unwrap()
        );
        // a coarse console sparkline of the ECDF
        let bar: String = props
            .iter()
            .step_by(4)
            .map(|p| match (p * 4.0) as u32 {
                0 => '.',
                1 => ':',
                2 => '|',
                3 => '#',
                _ => '@',
            })
            .collect();
        println!("  {bar}");
    }
    Ok(())
}
