//! Evaluable test functions with bounds, optional analytic gradients and
//! known optima, plus seeded shift/rotate/offset instance transforms.
//!
//! The default suite contains the sphere family, a bimodal polynomial
//! example, an ill-conditioned ellipsoid, Rastrigin, a finite-sum
//! Weierstrass-type function and a Gallagher-style multi-peak function.
//! Evaluation is pure; call counting is the harness's job.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::vecmath;
use crate::{Error, Result};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Observer invoked as `hook(x, f(x))` on every instrumented evaluation.
pub type EvalHook = Arc<dyn Fn(&[f64], f64) + Send + Sync>;

/// Default sphere-helper center for two-dimensional problems.
pub const DEFAULT_SPHERE_CENTER: [f64; 2] = [-3.5, -2.5];

/// Default box per axis for every suite member.
pub const DEFAULT_BOUNDS: (f64, f64) = (-5.0, 5.0);

/// How a gradient is obtained.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum GradMode {
    /// Use the problem's closed-form gradient. Consumes no evaluations.
    Analytic,
    /// Central finite differences with step `h`; consumes `2d` evaluations
    /// per gradient (plus one shared center evaluation if any axis has to
    /// fall back to a one-sided stencil at the boundary).
    CentralFd { h: f64 },
}

impl GradMode {
    pub fn central_fd_default() -> Self {
        GradMode::CentralFd { h: 1e-5 }
    }
}

/// Result of a gradient evaluation.
#[derive(Debug, Clone)]
pub struct GradientEval {
    pub g: Vec<f64>,
    /// Number of `f` evaluations consumed (0 in analytic mode).
    pub evals: u64,
    /// True when a boundary forced a one-sided stencil on some axis.
    pub one_sided: bool,
}

/// A deterministic single-objective function over a box.
#[derive(Clone)]
pub struct ScalarProblem {
    pub id: String,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    evaluator: Evaluator,
    analytic_gradient: Option<GradientFn>,
    pub known_optimum: Option<(Vec<f64>, f64)>,
}

impl std::fmt::Debug for ScalarProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarProblem")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("bounds", &self.bounds)
            .field("known_optimum", &self.known_optimum)
            .finish()
    }
}

impl ScalarProblem {
    pub fn new(
        id: impl Into<String>,
        dim: usize,
        bounds: Vec<(f64, f64)>,
        evaluator: Evaluator,
    ) -> Result<Self> {
        if dim == 0 || bounds.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bounds.len(),
            });
        }
        if bounds.iter().any(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo >= hi) {
            return Err(Error::InvalidConfig("bounds must form a nonempty box".into()));
        }
        Ok(Self {
            id: id.into(),
            dim,
            bounds,
            evaluator,
            analytic_gradient: None,
            known_optimum: None,
        })
    }

    pub fn with_gradient(mut self, g: GradientFn) -> Self {
        self.analytic_gradient = Some(g);
        self
    }

    pub fn with_optimum(mut self, x: Vec<f64>, f_opt: f64) -> Self {
        self.known_optimum = Some((x, f_opt));
        self
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.analytic_gradient.is_some()
    }

    /// Evaluates `f(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.evaluator)(x))
    }

    /// Gradient of `f` at `x`, either analytic or by central differences.
    ///
    /// In finite-difference mode, stencil points that would leave the box
    /// fall back to a one-sided difference and the result is flagged.
    pub fn gradient(&self, x: &[f64], mode: GradMode) -> Result<GradientEval> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        match mode {
            GradMode::Analytic => {
                let g = self
                    .analytic_gradient
                    .as_ref()
                    .ok_or_else(|| Error::NoAnalyticGradient(self.id.clone()))?;
                Ok(GradientEval {
                    g: g(x),
                    evals: 0,
                    one_sided: false,
                })
            }
            GradMode::CentralFd { h } => self.central_fd(x, h),
        }
    }

    fn central_fd(&self, x: &[f64], h: f64) -> Result<GradientEval> {
        let mut g = vec![0.0; self.dim];
        let mut evals = 0u64;
        let mut one_sided = false;
        let mut f_center: Option<f64> = None;
        let mut xp = x.to_vec();
        for i in 0..self.dim {
            let (lo, hi) = self.bounds[i];
            let xi = x[i];
            let up_ok = xi + h <= hi;
            let down_ok = xi - h >= lo;
            let gi = if up_ok && down_ok {
                xp[i] = xi + h;
                let fp = (self.evaluator)(&xp);
                xp[i] = xi - h;
                let fm = (self.evaluator)(&xp);
                evals += 2;
                (fp - fm) / (2.0 * h)
            } else {
                one_sided = true;
                let fc = *f_center.get_or_insert_with(|| {
                    evals += 1;
                    (self.evaluator)(x)
                });
                if up_ok {
                    xp[i] = xi + h;
                    let fp = (self.evaluator)(&xp);
                    evals += 1;
                    (fp - fc) / h
                } else if down_ok {
                    xp[i] = xi - h;
                    let fm = (self.evaluator)(&xp);
                    evals += 1;
                    (fc - fm) / h
                } else {
                    return Err(Error::InvalidConfig(format!(
                        "finite-difference step {h} exceeds the box width on axis {i}"
                    )));
                }
            };
            g[i] = gi;
            xp[i] = xi;
        }
        Ok(GradientEval { g, evals, one_sided })
    }

    /// Returns a copy whose evaluator invokes `hook(x, f(x))` on every call.
    /// Used by the benchmark harness and the solver for budget accounting.
    pub fn with_eval_hook(&self, hook: EvalHook) -> ScalarProblem {
        let inner = self.evaluator.clone();
        let mut out = self.clone();
        out.evaluator = Arc::new(move |x: &[f64]| {
            let v = inner(x);
            hook(x, v);
            v
        });
        out
    }
}

/// Seeded shift/rotate/offset transform applied to a [`ScalarProblem`].
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub seed: u64,
    pub shift: Vec<f64>,
    /// Row-major orthonormal `d x d` matrix.
    pub rotation: Vec<Vec<f64>>,
    pub value_offset: f64,
}

impl InstanceSpec {
    /// The identity transform.
    pub fn identity(dim: usize) -> Self {
        Self {
            seed: 0,
            shift: vec![0.0; dim],
            rotation: identity_matrix(dim),
            value_offset: 0.0,
        }
    }

    /// Deterministically derives a transform from `seed`: a random rotation,
    /// a shift drawn uniformly from `[-0.5, 0.5]` per axis (kept small so
    /// transformed optima stay inside the default box) and a value offset in
    /// `[-100, 100]`.
    pub fn from_seed(seed: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rotation = random_rotation(&mut rng, dim);
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let value_offset = rng.gen_range(-100.0..100.0);
        Self {
            seed,
            shift,
            rotation,
            value_offset,
        }
    }

    /// Max absolute entry of `R^T R - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.rotation.len();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += self.rotation[k][i] * self.rotation[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

fn identity_matrix(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Orthonormal matrix from Gram-Schmidt on random uniform entries.
fn random_rotation(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // two orthogonalization passes keep the defect near machine precision
        for _ in 0..2 {
            for r in &rows {
                let p = vecmath::dot(&v, r);
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi -= p * ri;
                }
            }
        }
        let n = vecmath::norm(&v);
        if n < 1e-6 {
            continue; // nearly dependent draw, resample
        }
        for vi in &mut v {
            *vi /= n;
        }
        rows.push(v);
    }
    rows
}

fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| vecmath::dot(row, x)).collect()
}

fn mat_t_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let d = m.len();
    let mut out = vec![0.0; d];
    for (i, row) in m.iter().enumerate() {
        for j in 0..d {
            out[j] += row[j] * x[i];
        }
    }
    out
}

/// Returns a new problem computing `f(R (x - shift)) + value_offset`,
/// with the known optimum transformed to `shift + R^T x*`.
pub fn apply_instance(problem: &ScalarProblem, spec: &InstanceSpec) -> Result<ScalarProblem> {
    if spec.rotation.len() != problem.dim
        || spec.rotation.iter().any(|r| r.len() != problem.dim)
        || spec.shift.len() != problem.dim
    {
        return Err(Error::DimensionMismatch {
            expected: problem.dim,
            got: spec.rotation.len(),
        });
    }
    let defect = spec.orthonormality_defect();
    if defect > 1e-10 {
        return Err(Error::NonOrthonormalRotation(defect));
    }

    let inner_eval = problem.evaluator.clone();
    let rot = spec.rotation.clone();
    let shift = spec.shift.clone();
    let offset = spec.value_offset;
    let eval: Evaluator = {
        let rot = rot.clone();
        let shift = shift.clone();
        Arc::new(move |x: &[f64]| {
            let z = mat_vec(&rot, &vecmath::sub(x, &shift));
            inner_eval(&z) + offset
        })
    };

    let mut out = ScalarProblem::new(
        format!("{}_i{}", problem.id, spec.seed),
        problem.dim,
        problem.bounds.clone(),
        eval,
    )?;

    if let Some(inner_grad) = problem.analytic_gradient.clone() {
        let rot_g = rot.clone();
        let shift_g = shift.clone();
        out = out.with_gradient(Arc::new(move |x: &[f64]| {
            let z = mat_vec(&rot_g, &vecmath::sub(x, &shift_g));
            mat_t_vec(&rot_g, &inner_grad(&z))
        }));
    }
    if let Some((x_star, f_opt)) = &problem.known_optimum {
        let mut x_new = mat_t_vec(&rot, x_star);
        for (xi, si) in x_new.iter_mut().zip(&shift) {
            *xi += si;
        }
        out = out.with_optimum(x_new, f_opt + offset);
    }
    Ok(out)
}

fn default_box(dim: usize) -> Vec<(f64, f64)> {
    vec![DEFAULT_BOUNDS; dim]
}

/// Sphere `f(x) = sum_i (x_i - c_i)^2` with optimum `(c, 0)`.
pub fn sphere_problem(id: impl Into<String>, center: &[f64]) -> ScalarProblem {
    let c = center.to_vec();
    let c_eval = c.clone();
    let c_grad = c.clone();
    ScalarProblem::new(
        id,
        c.len(),
        default_box(c.len()),
        Arc::new(move |x: &[f64]| {
            x.iter()
                .zip(&c_eval)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum()
        }),
    )
    .expect("sphere construction is infallible")
    .with_gradient(Arc::new(move |x: &[f64]| {
        x.iter().zip(&c_grad).map(|(xi, ci)| 2.0 * (xi - ci)).collect()
    }))
    .with_optimum(c, 0.0)
}

fn cubic_stationary(start: f64) -> f64 {
    // stationary points of x^4 - 5x^2 + x: roots of 4x^3 - 10x + 1
    let mut x = start;
    for _ in 0..100 {
        let g = 4.0 * x * x * x - 10.0 * x + 1.0;
        let dg = 12.0 * x * x - 10.0;
        let step = g / dg;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

fn bimodal_value(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    a.powi(4) - 5.0 * a * a + a + b * b + 3.0
}

/// The bimodal polynomial `x1^4 - 5 x1^2 + x1 + x2^2 + 3`: a global minimum
/// of about -4.86 near `(-1.63, 0)` and a local one of about -1.69 near
/// `(1.53, 0)`.
pub fn bimodal_example() -> ScalarProblem {
    let x_star = cubic_stationary(-1.6);
    let f_opt = bimodal_value(&[x_star, 0.0]);
    ScalarProblem::new("bimodal_example", 2, default_box(2), Arc::new(bimodal_value))
        .expect("bimodal construction is infallible")
        .with_gradient(Arc::new(|x: &[f64]| {
            vec![4.0 * x[0].powi(3) - 10.0 * x[0] + 1.0, 2.0 * x[1]]
        }))
        .with_optimum(vec![x_star, 0.0], f_opt)
}

/// Location and value of the bimodal example's local (non-global) minimum.
pub fn bimodal_local_minimum() -> (Vec<f64>, f64) {
    let x = cubic_stationary(1.5);
    let f = bimodal_value(&[x, 0.0]);
    (vec![x, 0.0], f)
}

/// Ill-conditioned ellipsoid `sum_i 10^(6 (i-1)/(d-1)) x_i^2`.
pub fn ellipsoid(dim: usize) -> ScalarProblem {
    let coeffs: Vec<f64> = (0..dim)
        .map(|i| {
            if dim == 1 {
                1.0
            } else {
                10f64.powf(6.0 * i as f64 / (dim as f64 - 1.0))
            }
        })
        .collect();
    let c_eval = coeffs.clone();
    let c_grad = coeffs;
    ScalarProblem::new(
        "ellipsoid",
        dim,
        default_box(dim),
        Arc::new(move |x: &[f64]| x.iter().zip(&c_eval).map(|(xi, c)| c * xi * xi).sum()),
    )
    .expect("ellipsoid construction is infallible")
    .with_gradient(Arc::new(move |x: &[f64]| {
        x.iter().zip(&c_grad).map(|(xi, c)| 2.0 * c * xi).collect()
    }))
    .with_optimum(vec![0.0; dim], 0.0)
}

/// Rastrigin `10 d + sum_i (x_i^2 - 10 cos(2 pi x_i))`, optimum 0 at the origin.
pub fn rastrigin(dim: usize) -> ScalarProblem {
    ScalarProblem::new(
        "rastrigin",
        dim,
        default_box(dim),
        Arc::new(move |x: &[f64]| {
            10.0 * x.len() as f64
                + x.iter()
                    .map(|xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
                    .sum::<f64>()
        }),
    )
    .expect("rastrigin construction is infallible")
    .with_gradient(Arc::new(|x: &[f64]| {
        x.iter()
            .map(|xi| 2.0 * xi + 20.0 * PI * (2.0 * PI * xi).sin())
            .collect()
    }))
    .with_optimum(vec![0.0; dim], 0.0)
}

const WEIERSTRASS_A: f64 = 0.5;
const WEIERSTRASS_B: f64 = 3.0;
// Kept small enough that central differences at h = 1e-5 still track the
// analytic gradient; higher-order terms make the truncation error explode.
const WEIERSTRASS_K_MAX: u32 = 3;

/// Finite-sum Weierstrass-type function: rugged on several length scales,
/// with equal-valued minima at every integer lattice point (value 0).
pub fn weierstrass(dim: usize) -> ScalarProblem {
    let k_terms: Vec<(f64, f64)> = (0..=WEIERSTRASS_K_MAX)
        .map(|k| (WEIERSTRASS_A.powi(k as i32), WEIERSTRASS_B.powi(k as i32)))
        .collect();
    // per-axis minimum: all cosines hit -1 simultaneously at integers
    let w0: f64 = k_terms.iter().map(|(a, b)| a * (PI * b).cos()).sum();
    let terms_eval = k_terms.clone();
    let terms_grad = k_terms;
    ScalarProblem::new(
        "weierstrass",
        dim,
        default_box(dim),
        Arc::new(move |x: &[f64]| {
            x.iter()
                .map(|xi| {
                    terms_eval
                        .iter()
                        .map(|(a, b)| a * (2.0 * PI * b * (xi + 0.5)).cos())
                        .sum::<f64>()
                        - w0
                })
                .sum()
        }),
    )
    .expect("weierstrass construction is infallible")
    .with_gradient(Arc::new(move |x: &[f64]| {
        x.iter()
            .map(|xi| {
                terms_grad
                    .iter()
                    .map(|(a, b)| -a * 2.0 * PI * b * (2.0 * PI * b * (xi + 0.5)).sin())
                    .sum::<f64>()
            })
            .collect()
    }))
    .with_optimum(vec![0.0; dim], 0.0)
}

const GALLAGHER_PEAKS: usize = 21;
const GALLAGHER_SEED: u64 = 21;

/// Gallagher-style multi-peak function: the negated maximum of 21 seeded
/// Gaussian peaks of distinct heights. The highest peak (height 10) defines
/// the global optimum with value 0; the rest create many basins.
pub fn gallagher(dim: usize) -> ScalarProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(GALLAGHER_SEED);
    let mut peaks: Vec<(Vec<f64>, f64, f64)> = Vec::with_capacity(GALLAGHER_PEAKS);
    // peak centers stay in [-3, 3] so rotated+shifted instances keep the
    // optimum inside the default box
    for i in 0..GALLAGHER_PEAKS {
        let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let height = if i == 0 {
            10.0
        } else {
            1.1 + 8.0 * (i as f64 - 1.0) / (GALLAGHER_PEAKS as f64 - 2.0)
        };
        let width = rng.gen_range(0.8..1.6);
        peaks.push((center, height, width));
    }
    let best_center = peaks[0].0.clone();
    let best_height = peaks[0].1;
    let peaks_eval = peaks.clone();
    let peaks_grad = peaks;

    let active_peak = move |peaks: &[(Vec<f64>, f64, f64)], x: &[f64]| -> (usize, f64) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, (c, h, w)) in peaks.iter().enumerate() {
            let d2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
            let v = h * (-d2 / (2.0 * w * w)).exp();
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    };
    let active_eval = active_peak;

    ScalarProblem::new(
        "gallagher",
        dim,
        default_box(dim),
        Arc::new(move |x: &[f64]| {
            let (_, v) = active_eval(&peaks_eval, x);
            best_height - v
        }),
    )
    .expect("gallagher construction is infallible")
    .with_gradient(Arc::new(move |x: &[f64]| {
        let (i, v) = active_peak(&peaks_grad, x);
        let (c, _, w) = &peaks_grad[i];
        x.iter()
            .zip(c)
            .map(|(xi, ci)| v * (xi - ci) / (w * w))
            .collect()
    }))
    .with_optimum(best_center, 0.0)
}

/// The default two-dimensional suite.
pub fn make_suite() -> Vec<ScalarProblem> {
    vec![
        sphere_problem("sphere", &DEFAULT_SPHERE_CENTER),
        bimodal_example(),
        ellipsoid(2),
        rastrigin(2),
        weierstrass(2),
        gallagher(2),
    ]
}

/// Looks up a suite member by id.
pub fn suite_problem(id: &str) -> Result<ScalarProblem> {
    make_suite()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::UnknownProblem(id.to_string()))
}

/// JSON-facing summary of one suite member.
#[derive(Debug, Serialize)]
pub struct SuiteEntry {
    pub id: String,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub has_analytic_gradient: bool,
    pub f_opt: Option<f64>,
}

pub fn suite_listing(suite: &[ScalarProblem]) -> Vec<SuiteEntry> {
    suite
        .iter()
        .map(|p| SuiteEntry {
            id: p.id.clone(),
            dim: p.dim,
            bounds: p.bounds.clone(),
            has_analytic_gradient: p.has_analytic_gradient(),
            f_opt: p.known_optimum.as_ref().map(|(_, f)| *f),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bimodal_values_match_reported_optima() {
        let p = bimodal_example();
        let f_global = p.evaluate(&[-1.63, 0.0]).unwrap();
        assert!((f_global - -4.86).abs() <= 0.01, "got {f_global}");
        let f_local = p.evaluate(&[1.53, 0.0]).unwrap();
        assert!((f_local - -1.69).abs() <= 0.01, "got {f_local}");
    }

    #[test]
    fn rastrigin_zero_at_origin() {
        let p = rastrigin(2);
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn sphere_value_at_origin() {
        // direct arithmetic: 3.5^2 + 2.5^2 = 18.5
        let p = sphere_problem("sphere", &DEFAULT_SPHERE_CENTER);
        assert_relative_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), 18.5, max_relative = 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = rastrigin(2);
        assert!(matches!(
            p.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sphere_gradient_examples() {
        let p = sphere_problem("sphere", &DEFAULT_SPHERE_CENTER);
        let g = p.gradient(&DEFAULT_SPHERE_CENTER, GradMode::Analytic).unwrap();
        assert_eq!(g.g, vec![0.0, 0.0]);
        assert_eq!(g.evals, 0);
        let g = p.gradient(&[0.0, 0.0], GradMode::Analytic).unwrap();
        assert_relative_eq!(g.g[0], 7.0, max_relative = 1e-15);
        assert_relative_eq!(g.g[1], 5.0, max_relative = 1e-15);
    }

    #[test]
    fn central_fd_charges_2d_evaluations() {
        let p = rastrigin(2);
        let g = p.gradient(&[1.2, -0.7], GradMode::CentralFd { h: 1e-5 }).unwrap();
        assert_eq!(g.evals, 4);
        assert!(!g.one_sided);
    }

    #[test]
    fn boundary_stencil_falls_back_to_one_sided() {
        let p = rastrigin(2);
        let g = p.gradient(&[5.0, 0.0], GradMode::CentralFd { h: 1e-5 }).unwrap();
        assert!(g.one_sided);
    }

    #[test]
    fn analytic_unavailable_is_a_capability_error() {
        let p = ScalarProblem::new(
            "nograd",
            1,
            vec![(-1.0, 1.0)],
            Arc::new(|x: &[f64]| x[0] * x[0]),
        )
        .unwrap();
        assert!(matches!(
            p.gradient(&[0.5], GradMode::Analytic),
            Err(Error::NoAnalyticGradient(_))
        ));
    }

    /// Finite-difference oracle: analytic gradients of every suite member
    /// agree with central differences at seeded interior points.
    #[test]
    fn fd_oracle_agrees_with_analytic_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for p in make_suite() {
            for _ in 0..100 {
                let x: Vec<f64> = (0..p.dim).map(|_| rng.gen_range(-4.9..4.9)).collect();
                let ga = p.gradient(&x, GradMode::Analytic).unwrap().g;
                let gf = p.gradient(&x, GradMode::CentralFd { h: 1e-5 }).unwrap().g;
                let err = vecmath::dist(&ga, &gf);
                let scale = vecmath::norm(&ga).max(1.0);
                assert!(
                    err / scale < 1e-5,
                    "{}: fd mismatch {err:.3e} (scale {scale:.3e}) at {x:?}",
                    p.id
                );
            }
        }
    }

    #[test]
    fn known_optima_evaluate_to_f_opt() {
        for p in make_suite() {
            let (x, f_opt) = p.known_optimum.clone().unwrap();
            let f = p.evaluate(&x).unwrap();
            let denom = f_opt.abs().max(1.0);
            assert!(
                (f - f_opt).abs() / denom <= 1e-12,
                "{}: f(x*) = {f}, expected {f_opt}",
                p.id
            );
        }
    }

    #[test]
    fn known_optima_are_empirical_local_minima() {
        for p in make_suite() {
            let (x_star, f_opt) = p.known_optimum.clone().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..1000 {
                let mut delta: Vec<f64> = (0..p.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = vecmath::norm(&delta);
                for d in &mut delta {
                    *d *= 1e-4 / n;
                }
                let x = vecmath::add_scaled(&x_star, 1.0, &delta);
                let f = p.evaluate(&x).unwrap();
                assert!(
                    f >= f_opt - 1e-12,
                    "{}: perturbation beat optimum ({f} < {f_opt})",
                    p.id
                );
            }
        }
    }

    #[test]
    fn suite_contents_and_interior_feasibility() {
        let suite = make_suite();
        let bimodal = suite.iter().find(|p| p.id == "bimodal_example").unwrap();
        let (x, f) = bimodal.known_optimum.clone().unwrap();
        assert!((x[0] - -1.63).abs() < 0.01 && x[1] == 0.0);
        assert!((f - -4.86).abs() < 0.01);

        let sphere = suite.iter().find(|p| p.id == "sphere").unwrap();
        let (x, f) = sphere.known_optimum.clone().unwrap();
        assert_eq!(x, DEFAULT_SPHERE_CENTER.to_vec());
        assert_eq!(f, 0.0);

        for p in &suite {
            assert_eq!(p.dim, 2);
            p.evaluate(&[0.0, 0.0]).unwrap();
        }
    }

    #[test]
    fn identity_instance_is_pointwise_equal() {
        let p = rastrigin(2);
        let inst = apply_instance(&p, &InstanceSpec::identity(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            assert_eq!(p.evaluate(&x).unwrap(), inst.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn shifted_sphere_moves_its_optimum() {
        let p = sphere_problem("sphere0", &[0.0, 0.0]);
        let spec = InstanceSpec {
            seed: 0,
            shift: vec![1.0, 1.0],
            rotation: identity_matrix(2),
            value_offset: 0.0,
        };
        let inst = apply_instance(&p, &spec).unwrap();
        let (x, f) = inst.known_optimum.clone().unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
        assert_eq!(f, 0.0);
        assert_relative_eq!(inst.evaluate(&[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn same_seed_gives_bit_identical_rotation() {
        let a = InstanceSpec::from_seed(9, 2);
        let b = InstanceSpec::from_seed(9, 2);
        assert_eq!(a.rotation, b.rotation);
        assert_eq!(a.shift, b.shift);
        assert_eq!(a.value_offset, b.value_offset);
    }

    #[test]
    fn seeded_rotations_are_orthonormal() {
        for seed in 1..=15 {
            for dim in [2usize, 3, 5] {
                let spec = InstanceSpec::from_seed(seed, dim);
                assert!(
                    spec.orthonormality_defect() < 1e-10,
                    "seed {seed} dim {dim}: defect {}",
                    spec.orthonormality_defect()
                );
            }
        }
    }

    #[test]
    fn non_orthonormal_rotation_is_rejected() {
        let p = rastrigin(2);
        let spec = InstanceSpec {
            seed: 0,
            shift: vec![0.0, 0.0],
            rotation: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
            value_offset: 0.0,
        };
        assert!(matches!(
            apply_instance(&p, &spec),
            Err(Error::NonOrthonormalRotation(_))
        ));
    }

    /// Instance transforms preserve the value multiset up to the offset:
    /// f_inst(shift + R^T x) = f(x) + value_offset.
    #[test]
    fn instance_preserves_values_up_to_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in make_suite() {
            let spec = InstanceSpec::from_seed(5, p.dim);
            let inst = apply_instance(&p, &spec).unwrap();
            for _ in 0..50 {
                let x: Vec<f64> = (0..p.dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let mut y = mat_t_vec(&spec.rotation, &x);
                for (yi, si) in y.iter_mut().zip(&spec.shift) {
                    *yi += si;
                }
                let lhs = inst.evaluate(&y).unwrap();
                let rhs = p.evaluate(&x).unwrap() + spec.value_offset;
                assert_relative_eq!(lhs, rhs, max_relative = 1e-9, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn instanced_optima_remain_consistent_and_in_bounds() {
        for seed in 1..=15 {
            for p in make_suite() {
                let inst = apply_instance(&p, &InstanceSpec::from_seed(seed, p.dim)).unwrap();
                let (x, f_opt) = inst.known_optimum.clone().unwrap();
                assert!(vecmath::in_bounds(&x, &inst.bounds), "{}: {x:?}", inst.id);
                let f = inst.evaluate(&x).unwrap();
                assert!(
                    (f - f_opt).abs() <= 1e-9 * f_opt.abs().max(1.0),
                    "{}: f(x*) = {f} vs {f_opt}",
                    inst.id
                );
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        for p in make_suite() {
            let x = [1.234567, -2.987654];
            let a = p.evaluate(&x).unwrap();
            let b = p.evaluate(&x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
