//! End-to-end acceptance suite. Each test checks one headline capability
//! and prints a single PASS/FAIL line (visible with `--nocapture`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use somogsa::bench::{self, Algorithm, CampaignConfig, RunLog, TargetList};
use somogsa::biobj::{self, BiObjectiveProblem};
use somogsa::landscape::{self, GridSpec};
use somogsa::mogsa::{self, Classification, MogsaConfig};
use somogsa::neldermead::{self, NmConfig};
use somogsa::problems::{self, GradMode, DEFAULT_SPHERE_CENTER};

fn report(id: u32, name: &str, ok: bool) {
    println!("criterion {id} ({name}): {}", if ok { "PASS" } else { "FAIL" });
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn bi(f1: somogsa::problems::ScalarProblem) -> BiObjectiveProblem {
    BiObjectiveProblem::new(f1, DEFAULT_SPHERE_CENTER.to_vec()).unwrap()
}

/// The combined-gradient solver escapes the local trap of the bimodal
/// example from every canonical start, while plain Nelder-Mead started in
/// the trap's basin stays there.
#[test]
fn criterion_1_bimodal_rescue() {
    let p = problems::bimodal_example();
    let mut failures = Vec::new();
    for start in bench::start_points() {
        let res = mogsa::run(&bi(p.clone()), &start, &MogsaConfig::default(), 200_000).unwrap();
        let best = res.best_f1.as_ref().map(|(_, f)| *f).unwrap_or(f64::INFINITY);
        if best > -4.85 {
            failures.push((start, best));
        }
    }

    let (_, f_local) = problems::bimodal_local_minimum();
    let nm = neldermead::minimize(&p, &[2.5, 2.0], &NmConfig::default(), 200_000).unwrap();
    let nm_stalled = (nm.f_best - f_local).abs() <= 1e-2;

    let ok = failures.is_empty() && nm_stalled;
    report(1, "bimodal rescue", ok);
    assert!(
        ok,
        "solver failures: {failures:?}; nelder-mead f_best {} vs local value {f_local}",
        nm.f_best
    );
}

/// On Rastrigin the archive always contains the helper-sphere optimum,
/// reached in closed form when the sphere exploration steps past it.
#[test]
fn criterion_2_sphere_optimum_always_archived() {
    let starts = [
        [3.0, 1.0],
        [2.0, 4.0],
        [2.0, 2.0],
        [-3.0, 2.0],
        [2.5, 4.5],
        [2.0, -2.0],
    ];
    let mut misses = Vec::new();
    for start in starts {
        let res =
            mogsa::run(&bi(problems::rastrigin(2)), &start, &MogsaConfig::default(), 400_000)
                .unwrap();
        let hit = res
            .archive
            .iter()
            .any(|e| dist(&e.x, &DEFAULT_SPHERE_CENTER) < 5e-2);
        if !hit {
            misses.push((start, res.archive.clone()));
        }
    }
    let ok = misses.is_empty();
    report(2, "sphere optimum always archived", ok);
    assert!(ok, "starts missing the sphere center: {misses:?}");
}

/// Sliding between efficient sets finds the Rastrigin global optimum from
/// some but not all of the six canonical starts.
#[test]
fn criterion_3_rastrigin_global_found_from_some_starts() {
    let starts = [
        [3.0, 1.0],
        [2.0, 4.0],
        [2.0, 2.0],
        [-3.0, 2.0],
        [2.5, 4.5],
        [2.0, -2.0],
    ];
    let p = problems::rastrigin(2);
    let f_opt = p.known_optimum.as_ref().unwrap().1;
    let mut hits = 0;
    for start in starts {
        let res = mogsa::run(&bi(p.clone()), &start, &MogsaConfig::default(), 400_000).unwrap();
        if res.archive.iter().any(|e| e.f1 - f_opt <= 1e-3) {
            hits += 1;
        }
    }
    let ok = (2..=5).contains(&hits);
    report(3, "rastrigin global optimum from 2-5 of 6 starts", ok);
    assert!(ok, "global optimum archived from {hits} of 6 starts");
}

/// The bimodal gradient-field heatmap resolves exactly two basins at three
/// grid resolutions: the global basin's efficient set is ridge-free, the
/// local trap's set is cut by a ridge.
#[test]
fn criterion_4_bimodal_heatmap_basins() {
    let p = bi(problems::bimodal_example());
    let (x_star, _) = p.f1.known_optimum.clone().unwrap();
    let (x_local, _) = problems::bimodal_local_minimum();
    let mut ok = true;
    let mut detail = String::new();
    for resolution in [151, 301, 601] {
        let spec = GridSpec { resolution, ..GridSpec::default() };
        let grid = landscape::compute_field(&p, &spec).unwrap();
        let locate = |pt: &[f64]| {
            let ix = (0..resolution)
                .min_by(|&a, &b| {
                    (grid.xs[a] - pt[0]).abs().partial_cmp(&(grid.xs[b] - pt[0]).abs()).unwrap()
                })
                .unwrap();
            let iy = (0..resolution)
                .min_by(|&a, &b| {
                    (grid.ys[a] - pt[1]).abs().partial_cmp(&(grid.ys[b] - pt[1]).abs()).unwrap()
                })
                .unwrap();
            grid.basin_id[iy * resolution + ix]
        };
        let left = locate(&x_star);
        let right = locate(&x_local);
        let this_ok = grid.basins.len() == 2
            && left != right
            && grid.basins[left].ridge_free
            && !grid.basins[right].ridge_free;
        if !this_ok {
            ok = false;
            detail.push_str(&format!(
                "resolution {resolution}: basins {:?}, left id {left}, right id {right}\n",
                grid.basins
            ));
        }
    }
    report(4, "bimodal heatmap: two basins, one ridge-free", ok);
    assert!(ok, "{detail}");
}

/// Every archived candidate optimum across 100 seeded runs is stationary
/// (tiny gradient) or on a locally efficient set (nearly anti-parallel
/// gradients).
#[test]
fn criterion_5_archive_invariant_over_seeded_runs() {
    let suite = problems::make_suite();
    let mut violations = Vec::new();
    for seed in 0..100u64 {
        let f1 = suite[(seed % suite.len() as u64) as usize].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start: Vec<f64> = f1.bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
        let cfg = MogsaConfig {
            rng_seed: seed,
            grad_mode: GradMode::Analytic,
            ..MogsaConfig::default()
        };
        let p = bi(f1);
        let res = mogsa::run(&p, &start, &cfg, 100_000).unwrap();
        for e in &res.archive {
            if e.classification != Classification::CandidateOptimum {
                continue;
            }
            let g1 = p.f1.gradient(&e.x, GradMode::Analytic).unwrap().g;
            let g2 = p.f2_gradient(&e.x);
            let stationary = norm(&g1) < 1e-7;
            let anti_parallel = biobj::angle_deg(&g1, &g2).map(|a| a > 175.0).unwrap_or(true);
            if !stationary && !anti_parallel {
                violations.push((seed, p.f1.id.clone(), e.x.clone(), norm(&g1)));
            }
        }
    }
    let ok = violations.is_empty();
    report(5, "archived candidates are stationary or efficient", ok);
    assert!(ok, "violations: {violations:?}");
}

/// Central finite differences agree with the analytic gradients to a
/// relative error below 1e-5 at 100 interior points per suite member.
#[test]
fn criterion_6_finite_differences_match_analytic_gradients() {
    let mut worst: Option<(String, Vec<f64>, f64)> = None;
    for p in problems::make_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            // interior points, away from the box edges
            let x: Vec<f64> = p
                .bounds
                .iter()
                .map(|(lo, hi)| rng.gen_range(lo + 0.1..hi - 0.1))
                .collect();
            let ga = p.gradient(&x, GradMode::Analytic).unwrap().g;
            let gf = p.gradient(&x, GradMode::CentralFd { h: 1e-5 }).unwrap().g;
            let scale = norm(&ga).max(1.0);
            let err = dist(&ga, &gf) / scale;
            if worst.as_ref().is_none_or(|(_, _, w)| err > *w) {
                worst = Some((p.id.clone(), x, err));
            }
        }
    }
    let (id, x, err) = worst.unwrap();
    let ok = err < 1e-5;
    report(6, "finite differences match analytic gradients", ok);
    assert!(ok, "worst relative error {err:.3e} on {id} at {x:?}");
}

/// The ECDF aggregation agrees exactly with brute-force (run, target) pair
/// counting on 50 randomized synthetic log sets.
#[test]
fn criterion_7_ecdf_matches_brute_force_counting() {
    let mut ok = true;
    let mut detail = String::new();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_logs = rng.gen_range(1..10);
        let n_targets = 51;
        let logs: Vec<RunLog> = (0..n_logs)
            .map(|i| {
                let mut first_hit = Vec::with_capacity(n_targets);
                let mut last = 0u64;
                let mut alive = true;
                for _ in 0..n_targets {
                    alive = alive && rng.gen_bool(0.85);
                    if alive {
                        last += rng.gen_range(1..2_000);
                        first_hit.push(Some(last));
                    } else {
                        first_hit.push(None);
                    }
                }
                RunLog {
                    problem_id: format!("synthetic-{i}"),
                    instance_seed: seed,
                    algorithm: Algorithm::Mogsa,
                    start: vec![0.0, 0.0],
                    budget: 200_000,
                    dim: rng.gen_range(1..4),
                    first_hit,
                    final_best: Some(0.0),
                    failed: false,
                }
            })
            .collect();
        let grid = bench::eval_grid(100_000);
        let fast = bench::ecdf_proportions(&logs, n_targets, &grid);
        for (gi, &e) in grid.iter().enumerate() {
            let mut hits = 0usize;
            for log in &logs {
                for t in 0..n_targets {
                    if let Some(fh) = log.first_hit[t] {
                        if fh <= e * log.dim as u64 {
                            hits += 1;
                        }
                    }
                }
            }
            let brute = hits as f64 / (logs.len() * n_targets) as f64;
            if fast[gi].to_bits() != brute.to_bits() {
                ok = false;
                detail = format!("seed {seed}, abscissa {e}: {} vs {brute}", fast[gi]);
            }
        }
    }
    report(7, "ecdf equals brute-force pair counting", ok);
    assert!(ok, "{detail}");
}

/// Desk-scale campaign on the rugged suite members: the combined-gradient
/// solver's final best matches or beats Nelder-Mead in at least 80% of the
/// paired trials and is strictly better in at least half.
#[test]
fn criterion_8_desk_campaign_beats_nelder_mead() {
    let cfg = CampaignConfig {
        problems: vec!["rastrigin".into(), "weierstrass".into(), "gallagher".into()],
        instance_seeds: vec![1, 2, 3],
        algorithms: vec![Algorithm::Mogsa, Algorithm::NelderMead],
        budget_per_dim: 200_000,
        starts: None,
        sphere_center: None,
    };
    let logs = bench::run_campaign(&cfg, &TargetList::standard()).unwrap();

    let mut pairs = 0usize;
    let mut no_worse = 0usize;
    let mut strictly_better = 0usize;
    for a in logs.iter().filter(|l| l.algorithm == Algorithm::Mogsa) {
        let b = logs
            .iter()
            .find(|l| {
                l.algorithm == Algorithm::NelderMead
                    && l.problem_id == a.problem_id
                    && l.instance_seed == a.instance_seed
                    && l.start == a.start
            })
            .expect("paired trial");
        let (fa, fb) = (a.final_best.unwrap(), b.final_best.unwrap());
        pairs += 1;
        if fa <= fb {
            no_worse += 1;
        }
        if fa < fb {
            strictly_better += 1;
        }
    }
    assert_eq!(pairs, 3 * 3 * 10);
    let ok = no_worse as f64 >= 0.8 * pairs as f64 && strictly_better as f64 >= 0.5 * pairs as f64;
    report(8, "campaign beats the derivative-free baseline", ok);
    assert!(
        ok,
        "no worse in {no_worse}/{pairs}, strictly better in {strictly_better}/{pairs}"
    );
}

/// Identical seeds give byte-identical run logs and traces.
#[test]
fn criterion_9_byte_identical_outputs_for_same_seeds() {
    let cfg = CampaignConfig {
        problems: vec!["rastrigin".into(), "bimodal_example".into()],
        instance_seeds: vec![0, 1],
        algorithms: vec![Algorithm::Mogsa, Algorithm::NelderMead],
        budget_per_dim: 10_000,
        starts: Some(vec![vec![2.5, 2.0], vec![-1.0, 3.0]]),
        sphere_center: None,
    };
    let render_logs = || {
        let logs = bench::run_campaign(&cfg, &TargetList::standard()).unwrap();
        let mut buf = Vec::new();
        bench::write_runlogs_jsonl(&logs, &mut buf).unwrap();
        buf
    };
    let logs_ok = render_logs() == render_logs();

    let render_trace = || {
        let res = mogsa::run(
            &bi(problems::rastrigin(2)),
            &[2.0, 2.0],
            &MogsaConfig { rng_seed: 7, ..MogsaConfig::default() },
            50_000,
        )
        .unwrap();
        let mut buf = Vec::new();
        mogsa::write_trace_jsonl(&res.trace, &mut buf).unwrap();
        buf
    };
    let trace_ok = render_trace() == render_trace();

    let ok = logs_ok && trace_ok;
    report(9, "byte-identical outputs for identical seeds", ok);
    assert!(ok, "logs identical: {logs_ok}, traces identical: {trace_ok}");
}

/// The evaluation hook is the single accounting channel: a run's reported
/// `f1` evaluation count matches an outer independent counter wrapped
/// around the same objective.
#[test]
fn eval_accounting_is_consistent_across_hooks() {
    let p = problems::bimodal_example();
    let mut reported = 0;
    let counted = bench::count_evals(&p, |instrumented| {
        let b = BiObjectiveProblem::new(instrumented.clone(), DEFAULT_SPHERE_CENTER.to_vec())
            .unwrap();
        let res = mogsa::run(&b, &[2.5, 2.0], &MogsaConfig::default(), 100_000).unwrap();
        reported = res.evals_f1;
    });
    assert!(counted > 0);
    assert_eq!(counted, reported);
}
