//! Multiobjectivization: pairs a scalar problem `f1` with a sphere helper
//! objective `f2(x) = sum_i (x_i - s_i)^2` and provides the normalized
//! multi-objective gradient and the anti-parallelism efficiency test.
//!
//! The sphere and its gradient are closed-form; neither charges anything to
//! the `f1` evaluation budget.

use crate::problems::{GradMode, ScalarProblem};
use crate::vecmath;
use crate::{Error, Result};

/// Raw gradient norms below this are treated as zero; normalizing such a
/// gradient yields the zero vector plus a degeneracy flag instead of NaNs.
pub const ZERO_GRAD_TOL: f64 = 1e-8;

/// Default tolerance on the multi-objective gradient norm for calling a
/// point locally efficient.
pub const DEFAULT_EPS_MO: f64 = 1e-4;

/// `f1` plus a sphere objective centered at `s`.
#[derive(Debug, Clone)]
pub struct BiObjectiveProblem {
    pub f1: ScalarProblem,
    pub sphere_center: Vec<f64>,
}

impl BiObjectiveProblem {
    pub fn new(f1: ScalarProblem, sphere_center: Vec<f64>) -> Result<Self> {
        if sphere_center.len() != f1.dim {
            return Err(Error::DimensionMismatch {
                expected: f1.dim,
                got: sphere_center.len(),
            });
        }
        if !vecmath::in_bounds(&sphere_center, &f1.bounds) {
            return Err(Error::OutOfBounds(sphere_center));
        }
        Ok(Self { f1, sphere_center })
    }

    pub fn dim(&self) -> usize {
        self.f1.dim
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.f1.bounds
    }

    /// Sphere value; free of charge.
    pub fn f2_value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.sphere_center)
            .map(|(xi, si)| (xi - si) * (xi - si))
            .sum()
    }

    /// Closed-form sphere gradient `2 (x - s)`; free of charge.
    pub fn f2_gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.sphere_center)
            .map(|(xi, si)| 2.0 * (xi - si))
            .collect()
    }
}

/// `sum_i (x_i - s_i)^2`
pub fn sphere_value(s: &[f64], x: &[f64]) -> Result<f64> {
    if s.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            got: x.len(),
        });
    }
    Ok(x.iter().zip(s).map(|(xi, si)| (xi - si) * (xi - si)).sum())
}

/// Both single-objective gradients at a point, their normalized forms, and
/// the combined multi-objective gradient `mo = g1_norm + g2_norm`.
#[derive(Debug, Clone)]
pub struct GradientPair {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// Unit vector, or all zeros when `|g1| < ZERO_GRAD_TOL`.
    pub g1_norm: Vec<f64>,
    pub g2_norm: Vec<f64>,
    pub g1_degenerate: bool,
    pub g2_degenerate: bool,
    pub mo: Vec<f64>,
    /// `f1` evaluations consumed (finite-difference mode only).
    pub evals_charged: u64,
}

impl GradientPair {
    /// `|mo|`, in `[0, 2]`: close to 2 when the gradients align, close to 0
    /// when they cancel (the Fritz-John condition for two objectives).
    pub fn mo_norm(&self) -> f64 {
        vecmath::norm(&self.mo)
    }

    pub fn degenerate(&self) -> bool {
        self.g1_degenerate || self.g2_degenerate
    }
}

fn normalize_or_zero(g: &[f64]) -> (Vec<f64>, bool) {
    match vecmath::normalize(g, ZERO_GRAD_TOL) {
        Some(u) => (u, false),
        None => (vec![0.0; g.len()], true),
    }
}

/// Computes the multi-objective gradient at `x`: `g1` via the requested mode
/// on `f1` (charging evaluations in finite-difference mode), `g2` analytic.
pub fn mo_gradient(p: &BiObjectiveProblem, x: &[f64], mode: GradMode) -> Result<GradientPair> {
    let ge = p.f1.gradient(x, mode)?;
    if ge.g.iter().any(|v| !v.is_finite()) {
        let bad = ge.g.iter().copied().find(|v| !v.is_finite()).unwrap();
        return Err(Error::NonFinite {
            x: x.to_vec(),
            value: bad,
        });
    }
    let g2 = p.f2_gradient(x);
    let (g1_norm, g1_degenerate) = normalize_or_zero(&ge.g);
    let (g2_norm, g2_degenerate) = normalize_or_zero(&g2);
    let mo = vecmath::add_scaled(&g1_norm, 1.0, &g2_norm);
    Ok(GradientPair {
        g1: ge.g,
        g2,
        g1_norm,
        g2_norm,
        g1_degenerate,
        g2_degenerate,
        mo,
        evals_charged: ge.evals,
    })
}

/// Angle between two nonzero vectors, in degrees in `[0, 180]`.
pub fn angle_deg(u: &[f64], v: &[f64]) -> Result<f64> {
    let nu = vecmath::norm(u);
    let nv = vecmath::norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cos = (vecmath::dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// True when `|mo| < eps`, or when either single-objective gradient is
/// itself (numerically) zero — a single-objective optimum is efficient.
pub fn is_locally_efficient(
    p: &BiObjectiveProblem,
    x: &[f64],
    eps: f64,
    mode: GradMode,
) -> Result<bool> {
    let pair = mo_gradient(p, x, mode)?;
    Ok(pair.degenerate() || pair.mo_norm() < eps)
}
