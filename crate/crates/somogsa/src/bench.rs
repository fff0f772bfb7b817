//! Fixed-target benchmarking: run logs, target hit recording, empirical
//! cumulative runtime distributions (ECDFs), and campaign orchestration.
//!
//! Every trial instruments the objective with a recording hook that counts
//! evaluations, tracks the best value seen, and stamps the first evaluation
//! at which each precision target is reached. Logs are serialized as
//! JSON-lines; ECDFs aggregate (run, target) pairs onto a log-spaced
//! evaluations-per-dimension grid.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biobj::BiObjectiveProblem;
use crate::mogsa::{self, MogsaConfig};
use crate::neldermead::{self, NmConfig};
use crate::problems::{self, InstanceSpec, ScalarProblem, DEFAULT_SPHERE_CENTER};
use crate::{Error, Result};

/// Precision targets above the known optimum: `10^(2 - 0.2 i)` for
/// `i = 0..=50`, i.e. from `1e2` down to `1e-8`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetList {
    pub deltas: Vec<f64>,
}

impl TargetList {
    pub fn standard() -> Self {
        Self {
            deltas: (0..=50).map(|i| 10f64.powf(2.0 - 0.2 * i as f64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

impl Default for TargetList {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Mogsa,
    NelderMead,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Mogsa => write!(f, "mogsa"),
            Algorithm::NelderMead => write!(f, "nelder-mead"),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mogsa" => Ok(Algorithm::Mogsa),
            "nelder-mead" | "neldermead" | "nm" => Ok(Algorithm::NelderMead),
            other => Err(Error::Parse {
                what: "algorithm".into(),
                detail: format!("unknown algorithm `{other}`"),
            }),
        }
    }
}

/// One trial's record, serialized as a single JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub problem_id: String,
    /// Instance transform seed; `0` is the untransformed problem.
    pub instance_seed: u64,
    pub algorithm: Algorithm,
    pub start: Vec<f64>,
    pub budget: u64,
    pub dim: usize,
    /// Per target, the evaluation count at which it was first reached
    /// within budget; parallel to [`TargetList::deltas`].
    pub first_hit: Vec<Option<u64>>,
    /// Best value within budget; `None` if no evaluation happened.
    pub final_best: Option<f64>,
    /// True when the optimizer returned an error; hits up to the failure
    /// still count.
    pub failed: bool,
}

struct RecorderState {
    evals: u64,
    best: Option<f64>,
    first_hit: Vec<Option<u64>>,
    /// Next unhit target index; targets are sorted loosest first, so hits
    /// advance monotonically.
    next_target: usize,
}

/// Runs one algorithm once on one problem and records target hits.
pub fn run_trial(
    problem: &ScalarProblem,
    algorithm: Algorithm,
    start: &[f64],
    budget: u64,
    targets: &TargetList,
    sphere_center: &[f64],
    mogsa_cfg: &MogsaConfig,
) -> Result<RunLog> {
    let (_, f_opt) = problem
        .known_optimum
        .clone()
        .ok_or_else(|| Error::InvalidConfig("targets require a problem with a known optimum".into()))?;
    let abs_targets: Vec<f64> = targets.deltas.iter().map(|d| f_opt + d).collect();

    let state = Arc::new(Mutex::new(RecorderState {
        evals: 0,
        best: None,
        first_hit: vec![None; targets.len()],
        next_target: 0,
    }));
    let state_hook = state.clone();
    let abs = abs_targets.clone();
    let instrumented = problem.with_eval_hook(Arc::new(move |_x: &[f64], v: f64| {
        let mut st = state_hook.lock().unwrap();
        st.evals += 1;
        if st.evals > budget {
            return; // past the budget: nothing more is recorded
        }
        if st.best.is_none_or(|b| v < b) {
            st.best = Some(v);
        }
        while st.next_target < abs.len() && v <= abs[st.next_target] {
            let e = st.evals;
            let i = st.next_target;
            st.first_hit[i] = Some(e);
            st.next_target += 1;
        }
    }));

    let failed = match algorithm {
        Algorithm::Mogsa => {
            let bi = BiObjectiveProblem::new(instrumented, sphere_center.to_vec())?;
            mogsa::run(&bi, start, mogsa_cfg, budget).is_err()
        }
        Algorithm::NelderMead => {
            neldermead::minimize(&instrumented, start, &NmConfig::default(), budget).is_err()
        }
    };

    let st = state.lock().unwrap();
    Ok(RunLog {
        problem_id: problem.id.clone(),
        instance_seed: 0,
        algorithm,
        start: start.to_vec(),
        budget,
        dim: problem.dim,
        first_hit: st.first_hit.clone(),
        final_best: st.best,
        failed,
    })
}

/// The ten canonical two-dimensional start points used by the campaigns.
pub fn start_points() -> Vec<Vec<f64>> {
    vec![
        vec![5.0, 5.0],
        vec![-5.0, 5.0],
        vec![5.0, -5.0],
        vec![-5.0, -5.0],
        vec![2.0, 4.0],
        vec![4.0, 2.0],
        vec![-2.5, 4.0],
        vec![1.0, -2.0],
        vec![0.0, 0.0],
        vec![-4.5, 0.0],
    ]
}

/// A full benchmarking campaign over the cross product of problems,
/// instance seeds, algorithms, and start points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub problems: Vec<String>,
    /// `0` means the untransformed problem; other seeds shift/rotate/offset.
    pub instance_seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    /// Evaluation budget per trial is `budget_per_dim * dim`.
    pub budget_per_dim: u64,
    /// Defaults to [`start_points`].
    #[serde(default)]
    pub starts: Option<Vec<Vec<f64>>>,
    /// Defaults to the standard helper-sphere center.
    #[serde(default)]
    pub sphere_center: Option<Vec<f64>>,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            what: "campaign config".into(),
            detail: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse {
            what: "campaign config".into(),
            detail: e.to_string(),
        })
    }
}

/// Runs every (problem, instance, algorithm, start) combination in
/// parallel; the returned logs are in the canonical cross-product order
/// regardless of scheduling.
pub fn run_campaign(cfg: &CampaignConfig, targets: &TargetList) -> Result<Vec<RunLog>> {
    let starts = cfg.starts.clone().unwrap_or_else(start_points);
    let sphere_center = cfg
        .sphere_center
        .clone()
        .unwrap_or_else(|| DEFAULT_SPHERE_CENTER.to_vec());

    let mut tasks = Vec::new();
    for pid in &cfg.problems {
        problems::suite_problem(pid)?; // validate ids upfront
        for &seed in &cfg.instance_seeds {
            for &alg in &cfg.algorithms {
                for (si, start) in starts.iter().enumerate() {
                    tasks.push((pid.clone(), seed, alg, si, start.clone()));
                }
            }
        }
    }

    tasks
        .into_par_iter()
        .map(|(pid, seed, alg, si, start)| {
            let base = problems::suite_problem(&pid)?;
            let spec = if seed == 0 {
                InstanceSpec::identity(base.dim)
            } else {
                InstanceSpec::from_seed(seed, base.dim)
            };
            let problem = problems::apply_instance(&base, &spec)?;
            let budget = cfg.budget_per_dim * problem.dim as u64;
            let mogsa_cfg = MogsaConfig {
                // deterministic per-trial seed for restart draws
                rng_seed: seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add(si as u64),
                ..MogsaConfig::default()
            };
            let mut log = run_trial(
                &problem,
                alg,
                &start,
                budget,
                targets,
                &sphere_center,
                &mogsa_cfg,
            )?;
            // logs carry the base id; the transform lives in instance_seed
            log.problem_id = pid;
            log.instance_seed = seed;
            Ok(log)
        })
        .collect()
}

/// Writes run logs as JSON-lines, one log per line.
pub fn write_runlogs_jsonl<W: std::io::Write>(logs: &[RunLog], mut w: W) -> Result<()> {
    for log in logs {
        serde_json::to_writer(&mut w, log).map_err(|e| Error::Parse {
            what: "run log".into(),
            detail: e.to_string(),
        })?;
        writeln!(w)?;
    }
    Ok(())
}

/// Reads run logs from JSON-lines, skipping blank lines.
pub fn read_runlogs_jsonl<R: std::io::BufRead>(r: R) -> Result<Vec<RunLog>> {
    let mut logs = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        logs.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            what: "run log".into(),
            detail: e.to_string(),
        })?);
    }
    Ok(logs)
}

/// 64 log-spaced integer evaluations-per-dimension abscissae in
/// `[1, budget_per_dim]`, deduplicated and sorted.
pub fn eval_grid(budget_per_dim: u64) -> Vec<u64> {
    let top = budget_per_dim.max(1) as f64;
    let mut grid: Vec<u64> = (0..64)
        .map(|i| (top.powf(i as f64 / 63.0)).round() as u64)
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Proportion of (run, target) pairs hit within `e * dim` evaluations, for
/// each grid abscissa `e`. This is the y-axis of the runtime ECDF.
pub fn ecdf_proportions(logs: &[RunLog], n_targets: usize, grid: &[u64]) -> Vec<f64> {
    let total_pairs = (logs.len() * n_targets) as f64;
    grid.iter()
        .map(|&e| {
            if total_pairs == 0.0 {
                return 0.0;
            }
            let hits: usize = logs
                .iter()
                .map(|log| {
                    let cutoff = e.saturating_mul(log.dim as u64);
                    log.first_hit
                        .iter()
                        .filter(|h| matches!(h, Some(fh) if *fh <= cutoff))
                        .count()
                })
                .sum();
            hits as f64 / total_pairs
        })
        .collect()
}

/// Writes an ECDF as TSV with the header `eval_per_dim\tproportion`.
pub fn write_ecdf_tsv<W: std::io::Write>(
    grid: &[u64],
    proportions: &[f64],
    mut w: W,
) -> Result<()> {
    writeln!(w, "eval_per_dim\tproportion")?;
    for (e, p) in grid.iter().zip(proportions) {
        writeln!(w, "{e}\t{p}")?;
    }
    Ok(())
}

/// Total `f1` evaluations a closure makes, via the instrumentation hook.
pub fn count_evals<F: FnOnce(&ScalarProblem)>(problem: &ScalarProblem, f: F) -> u64 {
    let counter = Arc::new(AtomicU64::new(0));
    let c = counter.clone();
    let instrumented = problem.with_eval_hook(Arc::new(move |_, _| {
        c.fetch_add(1, Ordering::Relaxed);
    }));
    f(&instrumented);
    counter.load(Ordering::Relaxed)
}
