//! Core domain types: feature sets, per-element weight vectors,
//! hyperparameters and aggregated set representations.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math;

/// Row-norm tolerance used to decide whether a set is unit-normalized.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// An `n x d` matrix of per-element embeddings belonging to one set.
///
/// Values are held as `f64` regardless of how they were stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    set_id: String,
    identity: String,
    n: usize,
    d: usize,
    features: Vec<f64>,
    quality: Option<Vec<f64>>,
    raw_norms: Option<Vec<f64>>,
}

impl FeatureSet {
    /// Builds a set from a row-major buffer of `n * d` values.
    pub fn new(
        set_id: impl Into<String>,
        identity: impl Into<String>,
        d: usize,
        features: Vec<f64>,
    ) -> Result<Self> {
        let set_id = set_id.into();
        if d == 0 {
            return Err(Error::Data(format!(
                "set `{set_id}`: dimension must be >= 1"
            )));
        }
        if features.is_empty() {
            return Err(Error::Data(format!("set `{set_id}`: set has no elements")));
        }
        if !features.len().is_multiple_of(d) {
            return Err(Error::Data(format!(
                "set `{set_id}`: {} values do not fill rows of dimension {d}",
                features.len()
            )));
        }
        if let Some(pos) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::Data(format!(
                "set `{set_id}`: non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(FeatureSet {
            n: features.len() / d,
            set_id,
            identity: identity.into(),
            d,
            features,
            quality: None,
            raw_norms: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(
        set_id: impl Into<String>,
        identity: impl Into<String>,
        rows: &[R],
    ) -> Result<Self> {
        let set_id = set_id.into();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut buf = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Data(format!(
                    "set `{set_id}`: row {i} has {} columns, expected {d}",
                    r.len()
                )));
            }
            buf.extend_from_slice(r);
        }
        Self::new(set_id, identity, d, buf)
    }

    /// Attaches per-element quality scores, each in (0, 1].
    pub fn with_quality(mut self, quality: Vec<f64>) -> Result<Self> {
        if quality.len() != self.n {
            return Err(Error::Data(format!(
                "set `{}`: {} quality scores for {} elements",
                self.set_id,
                quality.len(),
                self.n
            )));
        }
        if let Some(i) = quality.iter().position(|q| !(*q > 0.0 && *q <= 1.0)) {
            return Err(Error::Data(format!(
                "set `{}`: quality score {} at element {i} is outside (0, 1]",
                self.set_id, quality[i]
            )));
        }
        self.quality = Some(quality);
        Ok(self)
    }

    pub fn set_id(&self) -> &str {
        &self.set_id
    }

    pub fn identity(&self) -> &str {
        &self.identity
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }

    /// Row-major view of all values.
    pub fn as_slice(&self) -> &[f64] {
        &self.features
    }

    pub fn quality(&self) -> Option<&[f64]> {
        self.quality.as_deref()
    }

    /// Row norms recorded before the first normalization, if any.
    pub fn raw_norms(&self) -> Option<&[f64]> {
        self.raw_norms.as_deref()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        self.rows().map(math::norm).collect()
    }

    /// True when every row has unit Euclidean norm within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.rows().all(|r| libm::fabs(math::norm(r) - 1.0) <= tol)
    }

    /// Returns a copy with every row scaled to unit norm.
    ///
    /// The original row norms are kept as a side channel (see [`raw_norms`]);
    /// re-normalizing an already normalized set keeps the first recorded norms.
    ///
    /// [`raw_norms`]: FeatureSet::raw_norms
    pub fn normalize(&self) -> Result<Self> {
        let norms = self.row_norms();
        if let Some(i) = norms.iter().position(|&r| r == 0.0) {
            return Err(Error::Degenerate(format!(
                "set `{}`: row {i} is all zeros and cannot be normalized",
                self.set_id
            )));
        }
        let mut features = Vec::with_capacity(self.features.len());
        for (row, &r) in self.rows().zip(&norms) {
            features.extend(row.iter().map(|x| x / r));
        }
        Ok(FeatureSet {
            features,
            raw_norms: Some(self.raw_norms.clone().unwrap_or(norms)),
            ..self.clone()
        })
    }

    /// Sub-set made of the given rows, in order. Quality and raw norms follow
    /// their rows.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Data(format!(
                "set `{}`: cannot select zero rows",
                self.set_id
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::Contract(format!(
                "set `{}`: row index {bad} out of range for n = {}",
                self.set_id, self.n
            )));
        }
        let pick = |v: &Vec<f64>| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Ok(FeatureSet {
            set_id: self.set_id.clone(),
            identity: self.identity.clone(),
            n: indices.len(),
            d: self.d,
            features,
            quality: self.quality.as_ref().map(pick),
            raw_norms: self.raw_norms.as_ref().map(pick),
        })
    }

    pub(crate) fn require_normalized(&self, op: &str) -> Result<()> {
        for (i, r) in self.rows().enumerate() {
            let nr = math::norm(r);
            if libm::fabs(nr - 1.0) > UNIT_NORM_TOL {
                return Err(Error::Contract(format!(
                    "{op} requires unit-normalized rows; set `{}` row {i} has norm {nr}",
                    self.set_id
                )));
            }
        }
        Ok(())
    }
}

/// What a [`WeightVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightKind {
    Attention,
    SelfSim,
    Gmp,
    QaGmp,
    Sampling,
}

impl WeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightKind::Attention => "attention",
            WeightKind::SelfSim => "self_sim",
            WeightKind::Gmp => "gmp",
            WeightKind::QaGmp => "qagmp",
            WeightKind::Sampling => "sampling",
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "attention" => WeightKind::Attention,
            "self_sim" => WeightKind::SelfSim,
            "gmp" => WeightKind::Gmp,
            "qagmp" => WeightKind::QaGmp,
            "sampling" => WeightKind::Sampling,
            other => return Err(Error::Data(format!("unknown weight kind `{other}`"))),
        })
    }
}

/// Tolerance on the total mass of a sampling distribution.
pub const SAMPLING_SUM_TOL: f64 = 1e-9;

/// Per-element scores of one kind, validated against that kind's range.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    kind: WeightKind,
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(kind: WeightKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data(format!("{kind} weights: empty vector")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "{kind} weights: non-finite value at {i}"
            )));
        }
        let bad = match kind {
            // Quality sidecars may carry a perfect score of exactly 1.
            WeightKind::Attention => values.iter().position(|&v| !(v > 0.0 && v <= 1.0)),
            WeightKind::SelfSim => values.iter().position(|&v| !(-1.0..=1.0).contains(&v)),
            WeightKind::Sampling => values.iter().position(|&v| v < 0.0),
            WeightKind::Gmp | WeightKind::QaGmp => None,
        };
        if let Some(i) = bad {
            return Err(Error::Data(format!(
                "{kind} weights: value {} at {i} is out of range",
                values[i]
            )));
        }
        if kind == WeightKind::Sampling {
            let total: f64 = values.iter().sum();
            if libm::fabs(total - 1.0) > SAMPLING_SUM_TOL {
                return Err(Error::Data(format!(
                    "sampling weights sum to {total}, expected 1"
                )));
            }
        }
        Ok(WeightVector { kind, values })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn require_len(&self, n: usize, op: &str) -> Result<()> {
        if self.values.len() != n {
            return Err(Error::Contract(format!(
                "{op}: {} weights have length {}, expected {n}",
                self.kind,
                self.values.len()
            )));
        }
        Ok(())
    }
}

/// Tunable knobs for detection, sampling and aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Ridge term of the GMP solve.
    pub lambda: f64,
    /// Exponent on group cardinality for group sampling.
    pub lambda1: f64,
    /// Exponent on `1 - S` for self-similarity sampling and aggregation.
    pub lambda2: f64,
    /// Scale inside the exponential GMP sampling transform.
    pub lambda3: f64,
    /// Weight of the quality term in QA-GMP.
    pub lambda4: f64,
    /// Elements per drawn training instance.
    pub n_t: usize,
    /// Neighbor count for Quickshift++; `None` means `max(2, ceil(sqrt(n)))`.
    pub k: Option<usize>,
    /// Quickshift++ density fluctuation tolerance.
    pub beta: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            lambda: 1.0,
            lambda1: 0.5,
            lambda2: 2.0,
            lambda3: 10.0,
            lambda4: 5.0,
            n_t: 15,
            k: None,
            beta: 0.3,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", "must be a finite value > 0"));
        }
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(Error::param("lambda1", "must be a finite value >= 0"));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::param("lambda2", "must be a finite value >= 0"));
        }
        if !self.lambda3.is_finite() {
            return Err(Error::param("lambda3", "must be finite"));
        }
        if !(self.lambda4 >= 0.0 && self.lambda4.is_finite()) {
            return Err(Error::param("lambda4", "must be a finite value >= 0"));
        }
        if self.n_t == 0 {
            return Err(Error::param("n_t", "must be >= 1"));
        }
        if self.k == Some(0) {
            return Err(Error::param("k", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::param("beta", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Neighbor count for a set of `n` elements, clamped to `n - 1`.
    pub fn k_for(&self, n: usize) -> usize {
        let k = self.k.unwrap_or_else(|| default_k(n));
        k.min(n.saturating_sub(1)).max(1)
    }
}

/// `max(2, ceil(sqrt(n)))`.
pub fn default_k(n: usize) -> usize {
    let r = libm::ceil(libm::sqrt(n as f64)) as usize;
    r.max(2)
}

/// The aggregated, unit-norm template for one set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetRepresentation {
    pub set_id: String,
    pub vector: Vec<f64>,
    pub method: String,
}

impl SetRepresentation {
    /// Normalizes `aggregate` to unit length. A zero aggregate is an error.
    pub fn from_aggregate(set_id: &str, aggregate: &[f64], method: &str) -> Result<Self> {
        let vector = math::unit(aggregate).ok_or_else(|| {
            Error::Degenerate(format!(
                "set `{set_id}`: {method} aggregate is the zero vector"
            ))
        })?;
        Ok(SetRepresentation {
            set_id: set_id.to_owned(),
            vector,
            method: method.to_string(),
        })
    }

    pub fn d(&self) -> usize {
        self.vector.len()
    }
}
