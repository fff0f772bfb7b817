//! Nelder-Mead simplex minimizer: the derivative-free baseline for the
//! benchmark comparison, and the local refiner embedded in the solver.
//!
//! Classical coefficients, candidate vertices clamped to the box.

use crate::problems::ScalarProblem;
use crate::vecmath;
use crate::{Error, Result};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NmConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Initial simplex edge length, as a fraction of each coordinate range.
    pub init_scale: f64,
    /// Terminate when the value spread over the simplex drops below this.
    pub f_tol: f64,
    /// Terminate when the simplex diameter drops below this.
    pub x_tol: f64,
    pub max_evals: u64,
}

impl Default for NmConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            init_scale: 0.05,
            f_tol: 1e-14,
            x_tol: 1e-11,
            max_evals: 100_000,
        }
    }
}

impl NmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reflection <= 0.0
            || self.expansion <= self.reflection
            || !(0.0 < self.contraction && self.contraction < 1.0)
            || !(0.0 < self.shrink && self.shrink < 1.0)
        {
            return Err(Error::InvalidConfig(
                "Nelder-Mead coefficients must satisfy r > 0, e > r, 0 < c < 1, 0 < s < 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub evals: u64,
    /// True when the run stopped on the evaluation budget rather than on a
    /// tolerance.
    pub budget_exhausted: bool,
}

/// Minimizes `f` from `x0` with a standard reflect/expand/contract/shrink
/// loop, clamping every candidate vertex to the problem bounds.
pub fn minimize(f: &ScalarProblem, x0: &[f64], cfg: &NmConfig, budget: u64) -> Result<NmResult> {
    cfg.validate()?;
    let d = f.dim;
    if x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x0.len(),
        });
    }
    if !vecmath::in_bounds(x0, &f.bounds) {
        return Err(Error::OutOfBounds(x0.to_vec()));
    }
    let budget = budget.min(cfg.max_evals);
    if budget < (d + 1) as u64 {
        return Err(Error::BudgetTooSmall((d + 1) as u64));
    }

    let evals = std::cell::Cell::new(0u64);
    let eval = |x: &[f64]| -> Result<f64> {
        evals.set(evals.get() + 1);
        f.evaluate(x)
    };

    // initial simplex: x0 plus one offset vertex per axis
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let fx0 = eval(x0)?;
    simplex.push((x0.to_vec(), fx0));
    for i in 0..d {
        let (lo, hi) = f.bounds[i];
        let mut v = x0.to_vec();
        let step = cfg.init_scale * (hi - lo);
        // step away from the nearer bound so the vertex stays distinct
        v[i] = if x0[i] + step <= hi { x0[i] + step } else { x0[i] - step };
        let fv = eval(&v)?;
        simplex.push((v, fv));
    }

    let clamp = |mut x: Vec<f64>| -> Vec<f64> {
        vecmath::clamp_to_bounds(&mut x, &f.bounds);
        x
    };

    let mut budget_exhausted = false;
    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

        let f_spread = simplex[d].1 - simplex[0].1;
        let diameter = simplex
            .iter()
            .skip(1)
            .map(|(v, _)| vecmath::dist(v, &simplex[0].0))
            .fold(0.0f64, f64::max);
        if f_spread < cfg.f_tol || diameter < cfg.x_tol {
            break;
        }
        if evals.get() >= budget {
            budget_exhausted = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; d];
        for (v, _) in simplex.iter().take(d) {
            for (ci, vi) in centroid.iter_mut().zip(v) {
                *ci += vi / d as f64;
            }
        }
        let worst = simplex[d].clone();

        let reflect_pt = clamp(vecmath::add_scaled(
            &centroid,
            cfg.reflection,
            &vecmath::sub(&centroid, &worst.0),
        ));
        let f_reflect = eval(&reflect_pt)?;

        if f_reflect < simplex[0].1 {
            // try to expand past the reflection
            let expand_pt = clamp(vecmath::add_scaled(
                &centroid,
                cfg.expansion,
                &vecmath::sub(&centroid, &worst.0),
            ));
            let f_expand = eval(&expand_pt)?;
            simplex[d] = if f_expand < f_reflect {
                (expand_pt, f_expand)
            } else {
                (reflect_pt, f_reflect)
            };
        } else if f_reflect < simplex[d - 1].1 {
            simplex[d] = (reflect_pt, f_reflect);
        } else {
            // contraction, outside or inside of the worst vertex
            let (anchor, f_anchor) = if f_reflect < worst.1 {
                (&reflect_pt, f_reflect)
            } else {
                (&worst.0, worst.1)
            };
            let contract_pt = clamp(vecmath::add_scaled(
                &centroid,
                cfg.contraction,
                &vecmath::sub(anchor, &centroid),
            ));
            let f_contract = eval(&contract_pt)?;
            if f_contract < f_anchor {
                simplex[d] = (contract_pt, f_contract);
            } else {
                // shrink everything toward the best vertex
                let best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    let shrunk = clamp(
                        best.iter()
                            .zip(v.iter())
                            .map(|(b, vi)| b + cfg.shrink * (vi - b))
                            .collect(),
                    );
                    *v = shrunk;
                    *fv = eval(v)?;
                    if evals.get() >= budget {
                        break;
                    }
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x_best, f_best) = simplex.swap_remove(0);
    Ok(NmResult {
        x_best,
        f_best,
        evals: evals.get(),
        budget_exhausted,
    })
}
