//! Set templates: attention-weighted sums, burst-aware weighted sums and
//! two-stage group averaging.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::burst::weighted_sum;
use crate::error::{Error, Result};
use crate::math::{self, dot, sigmoid};
use crate::quickshift::GroupPartition;
use crate::set::{FeatureSet, SetRepresentation, WeightKind, WeightVector};

/// Query vector scored against each element to produce attention.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionQuery(Vec<f64>);

impl AttentionQuery {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(
                "attention query must be nonempty and finite".into(),
            ));
        }
        Ok(AttentionQuery(q))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `σ(q · f_i)` for every element.
pub fn attention_scores(set: &FeatureSet, q: &AttentionQuery) -> Result<WeightVector> {
    if q.0.len() != set.d() {
        return Err(Error::Contract(format!(
            "attention query has dimension {}, set `{}` has {}",
            q.0.len(),
            set.set_id(),
            set.d()
        )));
    }
    let scores = set.rows().map(|f| sigmoid(dot(&q.0, f))).collect();
    WeightVector::new(WeightKind::Attention, scores)
}

/// Where per-element quality scores come from.
#[derive(Debug, Clone, PartialEq)]
pub enum QualitySource {
    /// Scores stored alongside the set.
    Manifest,
    /// `σ(q · f_i)` for a supplied query.
    Attention(AttentionQuery),
    /// Row norms before normalization, min-max mapped onto `[0.01, 0.99]`.
    NormProxy,
    /// Constant 0.5.
    Uniform,
}

pub const NORM_PROXY_LOW: f64 = 0.01;
pub const NORM_PROXY_HIGH: f64 = 0.99;

pub fn quality_scores(set: &FeatureSet, source: &QualitySource) -> Result<WeightVector> {
    let n = set.n();
    let values = match source {
        QualitySource::Manifest => set
            .quality()
            .ok_or_else(|| {
                Error::Config(format!(
                    "set `{}` has no quality scores to use as attention",
                    set.set_id()
                ))
            })?
            .to_vec(),
        QualitySource::Attention(q) => return attention_scores(set, q),
        QualitySource::NormProxy => {
            let norms = set
                .raw_norms()
                .map_or_else(|| set.row_norms(), <[f64]>::to_vec);
            let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                norms
                    .iter()
                    .map(|r| {
                        NORM_PROXY_LOW + (NORM_PROXY_HIGH - NORM_PROXY_LOW) * (r - lo) / (hi - lo)
                    })
                    .collect()
            } else {
                vec![0.5; n]
            }
        }
        QualitySource::Uniform => vec![0.5; n],
    };
    WeightVector::new(WeightKind::Attention, values)
}

/// `Σ_i (Π_w w_i) f_i`, unit-normalized.
///
/// Weight vectors combine by elementwise product; an empty list gives the
/// plain mean direction. Negative coefficients are kept.
pub fn weighted_aggregate(
    set: &FeatureSet,
    weights: &[&WeightVector],
) -> Result<SetRepresentation> {
    let mut coeffs = vec![1.0; set.n()];
    for w in weights {
        w.require_len(set.n(), "weighted_aggregate")?;
        for (c, v) in coeffs.iter_mut().zip(w.values()) {
            *c *= v;
        }
    }
    let method: String = if weights.is_empty() {
        "mean".into()
    } else {
        weights
            .iter()
            .map(|w| w.kind().as_str())
            .collect::<Vec<_>>()
            .join("*")
    };
    let f = weighted_sum(set, &coeffs)?;
    SetRepresentation::from_aggregate(set.set_id(), &f, &method)
}

/// Averages each group, normalizes the group means, then sums them so every
/// group contributes equally regardless of cardinality.
pub fn two_stage_aggregate(
    set: &FeatureSet,
    partition: &GroupPartition,
) -> Result<SetRepresentation> {
    if partition.n() != set.n() {
        return Err(Error::Contract(format!(
            "partition covers {} elements, set `{}` has {}",
            partition.n(),
            set.set_id(),
            set.n()
        )));
    }
    let mut total = vec![0.0; set.d()];
    for (g, members) in partition.groups().iter().enumerate() {
        let mut mean = vec![0.0; set.d()];
        for &i in members {
            for (m, x) in mean.iter_mut().zip(set.row(i)) {
                *m += x;
            }
        }
        let c = members.len() as f64;
        mean.iter_mut().for_each(|m| *m /= c);
        let unit = math::unit(&mean).ok_or_else(|| {
            Error::Degenerate(format!(
                "set `{}`: group {g} averages to the zero vector",
                set.set_id()
            ))
        })?;
        for (t, u) in total.iter_mut().zip(&unit) {
            *t += u;
        }
    }
    SetRepresentation::from_aggregate(set.set_id(), &total, "two-stage")
}

/// Cosine similarity of two templates.
pub fn pairwise_similarity(a: &SetRepresentation, b: &SetRepresentation) -> Result<f64> {
    if a.d() != b.d() {
        return Err(Error::Contract(format!(
            "cannot compare `{}` (d = {}) with `{}` (d = {})",
            a.set_id,
            a.d(),
            b.set_id,
            b.d()
        )));
    }
    Ok(dot(&a.vector, &b.vector))
}
