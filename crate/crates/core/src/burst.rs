//! Burstiness measures over a normalized feature set: the cosine gram matrix,
//! per-element self-similarity, generalized max-pooling (GMP) weights and
//! their quality-aware variant, the set-level burst degree, and the
//! power-normalization baseline.
//!
//! Every function here expects unit-normalized rows, so gram entries are
//! cosine similarities in `[-1, 1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::set::{FeatureSet, SetRepresentation, WeightKind, WeightVector};

/// Symmetric `n x n` matrix of pairwise dot products `K = X Xᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    /// Wraps a row-major symmetric matrix. Asymmetry above `1e-12` is rejected.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::Contract(format!(
                "gram matrix: {} values do not form a nonempty {n} x {n} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("gram matrix: non-finite entry".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if libm::fabs(values[i * n + j] - values[j * n + i]) > 1e-12 {
                    return Err(Error::Contract(format!(
                        "gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GramMatrix { n, values })
    }

    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        GramMatrix { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Cosine gram matrix of a normalized set.
pub fn gram(set: &FeatureSet) -> Result<GramMatrix> {
    set.require_normalized("gram")?;
    let n = set.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        let fi = set.row(i);
        for j in i..n {
            let v = crate::math::dot(fi, set.row(j));
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(GramMatrix { n, values })
}

/// Mean similarity of each element to the whole set, `S = K 1 / n`.
pub fn self_similarity(k: &GramMatrix) -> WeightVector {
    let n = k.n() as f64;
    let values = (0..k.n())
        .map(|i| (k.row(i).iter().sum::<f64>() / n).clamp(-1.0, 1.0))
        .collect();
    WeightVector::new(WeightKind::SelfSim, values).expect("clamped self-similarity is in range")
}

/// Solves `(K + λI) x = rhs` through a Cholesky factorization.
fn solve_regularized(k: &GramMatrix, lambda: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter {
            name: "lambda",
            reason: format!("must be a finite value > 0, got {lambda}"),
        });
    }
    let n = k.n();
    let mut a = k.as_slice().to_vec();
    for i in 0..n {
        a[i * n + i] += lambda;
    }
    Cholesky::factor(&a, n)?.solve(rhs)
}

/// GMP weights `α = (K + λI)⁻¹ 1`.
///
/// Frequent elements share weight among themselves and end up with smaller
/// coefficients than rare ones. Weights may be negative and are not clamped.
pub fn gmp_weights(k: &GramMatrix, lambda: f64) -> Result<WeightVector> {
    let alpha = solve_regularized(k, lambda, &vec![1.0; k.n()])?;
    WeightVector::new(WeightKind::Gmp, alpha)
}

/// Quality-aware GMP weights `α = (K + λI)⁻¹ (1 + λ₄ · att)`.
pub fn qagmp_weights(
    k: &GramMatrix,
    lambda: f64,
    lambda4: f64,
    attention: &WeightVector,
) -> Result<WeightVector> {
    if attention.kind() != WeightKind::Attention {
        return Err(Error::Contract(format!(
            "qagmp expects attention scores, got {} weights",
            attention.kind()
        )));
    }
    attention.require_len(k.n(), "qagmp")?;
    if !(lambda4 >= 0.0 && lambda4.is_finite()) {
        return Err(Error::Parameter {
            name: "lambda4",
            reason: format!("must be a finite value >= 0, got {lambda4}"),
        });
    }
    let rhs: Vec<f64> = attention
        .values()
        .iter()
        .map(|a| 1.0 + lambda4 * a)
        .collect();
    let alpha = solve_regularized(k, lambda, &rhs)?;
    WeightVector::new(WeightKind::QaGmp, alpha)
}

/// `Xᵀ c`: the coefficient-weighted sum of rows, not normalized.
pub fn weighted_sum(set: &FeatureSet, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != set.n() {
        return Err(Error::Contract(format!(
            "set `{}`: {} coefficients for {} elements",
            set.set_id(),
            coeffs.len(),
            set.n()
        )));
    }
    let mut out = vec![0.0; set.d()];
    for (row, &c) in set.rows().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// Unit-normalized GMP template `F = Xᵀ α`.
pub fn gmp_representation(set: &FeatureSet, alpha: &WeightVector) -> Result<SetRepresentation> {
    alpha.require_len(set.n(), "gmp_representation")?;
    let f = weighted_sum(set, alpha.values())?;
    SetRepresentation::from_aggregate(set.set_id(), &f, "gmp")
}

/// Mean of all gram entries. High values flag sets dominated by near-duplicates.
pub fn burst_degree(k: &GramMatrix) -> f64 {
    let n = k.n() as f64;
    k.as_slice().iter().sum::<f64>() / (n * n)
}

/// Signed power `sign(x)|x|^p` per coordinate followed by unit normalization.
pub fn power_normalize(v: &[f64], p: f64) -> Result<Vec<f64>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter {
            name: "p",
            reason: format!("power must lie in (0, 1], got {p}"),
        });
    }
    let powered: Vec<f64> = v
        .iter()
        .map(|&x| libm::copysign(libm::pow(libm::fabs(x), p), x))
        .collect();
    crate::math::unit(&powered)
        .ok_or_else(|| Error::Degenerate("power normalization of a zero vector".into()))
}
