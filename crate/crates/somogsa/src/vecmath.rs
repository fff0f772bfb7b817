//! Small dense-vector helpers shared across the crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

/// `a + t * b`
pub fn add_scaled(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

pub fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Unit vector, or `None` when the norm is below `tol`.
pub fn normalize(a: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = norm(a);
    if n < tol {
        None
    } else {
        Some(a.iter().map(|x| x / n).collect())
    }
}

pub fn in_bounds(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter()
        .zip(bounds)
        .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
}

/// Clamps `x` componentwise into the box; returns true if any component moved.
pub fn clamp_to_bounds(x: &mut [f64], bounds: &[(f64, f64)]) -> bool {
    let mut clamped = false;
    for (xi, (lo, hi)) in x.iter_mut().zip(bounds) {
        if *xi < *lo {
            *xi = *lo;
            clamped = true;
        } else if *xi > *hi {
            *xi = *hi;
            clamped = true;
        }
    }
    clamped
}
