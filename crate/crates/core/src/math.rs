//! Small dense vector helpers shared across modules.

use alloc::vec::Vec;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Euclidean distance, computed from coordinate differences so that exact
/// duplicates are at distance exactly zero.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let t = x - y;
                t * t
            })
            .sum(),
    )
}

/// Scales `v` to unit length. Returns `None` when the norm is zero or not finite.
pub fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n > 0.0 && n.is_finite() {
        Some(v.iter().map(|x| x / n).collect())
    } else {
        None
    }
}

/// Logistic sigmoid, kept strictly inside (0, 1).
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Rescales nonnegative values to sum to one. Returns `None` if the total is
/// zero or not finite.
pub fn normalize_sum(values: &mut [f64]) -> Option<()> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
    Some(())
}
