//! Method selectors and the per-set operations the commands dispatch to.

use std::collections::BTreeMap;

use burstset_core::aggregate::{
    pairwise_similarity, quality_scores, two_stage_aggregate, weighted_aggregate, QualitySource,
};
use burstset_core::burst::{
    burst_degree, gmp_weights, gram, power_normalize, qagmp_weights, self_similarity, weighted_sum,
    GramMatrix,
};
use burstset_core::eval::{identification, roc, tar_at_far, IdentificationMode, RocCurve};
use burstset_core::quickshift::quickshiftpp;
use burstset_core::sampling::{
    draw_group_indices, draw_indices, gmp_sampling_weights, rng_from_seed, ssim_sampling_weights,
    Instance,
};
use burstset_core::{
    EvalProtocol, FeatureSet, GroupPartition, HyperParams, SetRepresentation, WeightKind,
    WeightVector,
};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent of the power-normalization baseline.
pub const PNORM_POWER: f64 = 0.5;

/// Odd constant spreading set indices over the seed space.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DetectMethod {
    Ssim,
    Gmp,
    Qagmp,
    Qshift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStrategy {
    Vanilla,
    Qshift,
    Ssim,
    Gmp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AggregateMethod {
    Mean,
    Attention,
    Ssim,
    Gmp,
    Qagmp,
    TwoStage,
    Pnorm,
}

impl AggregateMethod {
    pub fn name(self) -> &'static str {
        match self {
            AggregateMethod::Mean => "mean",
            AggregateMethod::Attention => "attention",
            AggregateMethod::Ssim => "ssim",
            AggregateMethod::Gmp => "gmp",
            AggregateMethod::Qagmp => "qagmp",
            AggregateMethod::TwoStage => "two-stage",
            AggregateMethod::Pnorm => "pnorm",
        }
    }
}

/// Where attention scores come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QualityChoice {
    /// Manifest quality when the set has it, otherwise the norm proxy.
    Auto,
    Manifest,
    Uniform,
    NormProxy,
}

impl QualityChoice {
    pub fn source(self, set: &FeatureSet) -> QualitySource {
        match self {
            QualityChoice::Auto if set.quality().is_some() => QualitySource::Manifest,
            QualityChoice::Auto | QualityChoice::NormProxy => QualitySource::NormProxy,
            QualityChoice::Manifest => QualitySource::Manifest,
            QualityChoice::Uniform => QualitySource::Uniform,
        }
    }
}

pub fn attention(set: &FeatureSet, quality: QualityChoice) -> Result<WeightVector> {
    Ok(quality_scores(set, &quality.source(set))?)
}

/// Seed of the `index`-th set of a run.
pub fn set_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(SEED_STRIDE)
}

/// A result plus an optional note about a fallback taken on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Noted<T> {
    pub value: T,
    pub note: Option<String>,
}

impl<T> Noted<T> {
    fn plain(value: T) -> Self {
        Noted { value, note: None }
    }
}

fn uniform_sampling(n: usize) -> WeightVector {
    WeightVector::new(WeightKind::Sampling, vec![1.0 / n as f64; n])
        .expect("uniform distribution is valid")
}

/// `(1 - S)^λ2` as a sampling distribution, or uniform when every element is
/// maximally self-similar.
fn ssim_or_uniform(s: &WeightVector, lambda2: f64) -> Result<Noted<WeightVector>> {
    match ssim_sampling_weights(s, lambda2) {
        Ok(w) => Ok(Noted::plain(w)),
        Err(burstset_core::Error::Degenerate(_)) => Ok(Noted {
            value: uniform_sampling(s.len()),
            note: Some("every element has self-similarity 1; using uniform weights".into()),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Output of one detection run over a set.
#[derive(Debug, Clone, PartialEq)]
pub enum Detection {
    Weights(WeightVector),
    Partition(GroupPartition),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOutcome {
    pub detection: Detection,
    pub burst_degree: f64,
}

pub fn detect(
    set: &FeatureSet,
    method: DetectMethod,
    params: &HyperParams,
    quality: QualityChoice,
) -> Result<DetectOutcome> {
    let unit = set.normalize()?;
    let k = gram(&unit)?;
    let detection = match method {
        DetectMethod::Ssim => Detection::Weights(self_similarity(&k)),
        DetectMethod::Gmp => Detection::Weights(gmp_weights(&k, params.lambda)?),
        DetectMethod::Qagmp => {
            let att = attention(set, quality)?;
            Detection::Weights(qagmp_weights(&k, params.lambda, params.lambda4, &att)?)
        }
        DetectMethod::Qshift => {
            Detection::Partition(quickshiftpp(&unit, params.k_for(unit.n()), params.beta)?)
        }
    };
    Ok(DetectOutcome {
        detection,
        burst_degree: burst_degree(&k),
    })
}

/// Draws `count` instances of `params.n_t` elements from one set.
pub fn sample(
    set: &FeatureSet,
    strategy: SampleStrategy,
    params: &HyperParams,
    count: usize,
    seed: u64,
) -> Result<Noted<Vec<Instance>>> {
    let unit = set.normalize()?;
    let mut rng = rng_from_seed(seed);
    let (partition, weights) = match strategy {
        SampleStrategy::Qshift => (
            Some(quickshiftpp(&unit, params.k_for(unit.n()), params.beta)?),
            Noted::plain(None),
        ),
        _ => {
            let w = sampling_weights(&unit, strategy, params)?;
            (
                None,
                Noted {
                    value: Some(w.value),
                    note: w.note,
                },
            )
        }
    };
    let mut instances = Vec::with_capacity(count);
    for _ in 0..count {
        let indices = match (&partition, &weights.value) {
            (Some(p), _) => draw_group_indices(p, params.lambda1, params.n_t, &mut rng)?,
            (None, Some(w)) => draw_indices(w, params.n_t, &mut rng)?,
            (None, None) => unreachable!("one sampling source is always built"),
        };
        instances.push(Instance {
            set_id: set.set_id().into(),
            indices,
        });
    }
    Ok(Noted {
        value: instances,
        note: weights.note,
    })
}

/// Element sampling distribution of a non-group strategy on a unit set.
pub fn sampling_weights(
    unit: &FeatureSet,
    strategy: SampleStrategy,
    params: &HyperParams,
) -> Result<Noted<WeightVector>> {
    let k = || gram(unit);
    Ok(match strategy {
        SampleStrategy::Vanilla => Noted::plain(uniform_sampling(unit.n())),
        SampleStrategy::Ssim => ssim_or_uniform(&self_similarity(&k()?), params.lambda2)?,
        SampleStrategy::Gmp => {
            let alpha = gmp_weights(&k()?, params.lambda)?;
            Noted::plain(gmp_sampling_weights(&alpha, params.lambda3)?)
        }
        SampleStrategy::Qshift => {
            return Err(Error::Usage(
                "group sampling draws groups first and has no element distribution".into(),
            ))
        }
    })
}

/// The unit-norm template of one set under `method`.
pub fn represent(
    set: &FeatureSet,
    method: AggregateMethod,
    params: &HyperParams,
    quality: QualityChoice,
) -> Result<Noted<SetRepresentation>> {
    let unit = set.normalize()?;
    let mut note = None;
    let rep = match method {
        AggregateMethod::Mean => weighted_aggregate(&unit, &[])?,
        AggregateMethod::Attention => weighted_aggregate(&unit, &[&attention(set, quality)?])?,
        AggregateMethod::Ssim => {
            let s = self_similarity(&gram(&unit)?);
            let w = ssim_or_uniform(&s, params.lambda2)?;
            note = w.note;
            weighted_aggregate(&unit, &[&attention(set, quality)?, &w.value])?
        }
        AggregateMethod::Gmp => {
            let alpha = gmp_weights(&gram(&unit)?, params.lambda)?;
            weighted_aggregate(&unit, &[&attention(set, quality)?, &alpha])?
        }
        AggregateMethod::Qagmp => {
            let att = attention(set, quality)?;
            let k: GramMatrix = gram(&unit)?;
            let alpha = qagmp_weights(&k, params.lambda, params.lambda4, &att)?;
            weighted_aggregate(&unit, &[&att, &alpha])?
        }
        AggregateMethod::TwoStage => {
            let partition = quickshiftpp(&unit, params.k_for(unit.n()), params.beta)?;
            two_stage_aggregate(&unit, &partition)?
        }
        AggregateMethod::Pnorm => {
            let att = attention(set, quality)?;
            let sum = weighted_sum(&unit, att.values())?;
            let v = power_normalize(&sum, PNORM_POWER)?;
            SetRepresentation::from_aggregate(set.set_id(), &v, "pnorm")?
        }
    };
    Ok(Noted {
        value: SetRepresentation {
            method: method.name().into(),
            ..rep
        },
        note,
    })
}

/// Templates for every set, in parallel, keyed by set id.
pub fn represent_all(
    sets: &[FeatureSet],
    method: AggregateMethod,
    params: &HyperParams,
    quality: QualityChoice,
) -> Result<Vec<Noted<SetRepresentation>>> {
    sets.par_iter()
        .map(|s| represent(s, method, params, quality).map_err(|e| Error::in_set(s.set_id(), e)))
        .collect()
}

/// Operating points requested from an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTargets {
    pub far: Vec<f64>,
    pub ranks: Vec<usize>,
    pub fpir: Vec<f64>,
}

impl Default for EvalTargets {
    fn default() -> Self {
        EvalTargets {
            far: vec![1e-4, 1e-3, 1e-2, 1e-1],
            ranks: vec![1, 5, 10],
            fpir: vec![1e-2, 1e-1],
        }
    }
}

/// Metrics keyed by the formatted operating point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tar: BTreeMap<String, f64>,
    pub rank: BTreeMap<String, f64>,
    pub tpir: BTreeMap<String, f64>,
    pub genuine_pairs: usize,
    pub impostor_pairs: usize,
    pub mated_probes: usize,
    pub non_mated_probes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub roc: Option<RocCurve>,
}

/// Cosine scores of every verification pair, in protocol order.
pub fn score_pairs(
    protocol: &EvalProtocol,
    reps: &BTreeMap<String, SetRepresentation>,
) -> Result<Vec<(f64, bool)>> {
    protocol
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let get = |id: &str| {
                reps.get(id).ok_or_else(|| {
                    Error::from(burstset_core::Error::Protocol(format!(
                        "pair {i}: no representation for set `{id}`"
                    )))
                })
            };
            Ok((
                pairwise_similarity(get(&p.a)?, get(&p.b)?)?,
                p.label.is_same(),
            ))
        })
        .collect()
}

/// Scores whichever halves of the protocol are present.
pub fn evaluate(
    protocol: &EvalProtocol,
    reps: &BTreeMap<String, SetRepresentation>,
    targets: &EvalTargets,
) -> Result<Evaluation> {
    protocol.validate(|id| reps.contains_key(id))?;
    let mut metrics = Metrics::default();
    let mut curve = None;
    if !protocol.pairs.is_empty() {
        let scores = score_pairs(protocol, reps)?;
        let c = roc(&scores)?;
        for &f in &targets.far {
            metrics.tar.insert(format!("{f:e}"), tar_at_far(&c, f)?);
        }
        metrics.genuine_pairs = scores.iter().filter(|s| s.1).count();
        metrics.impostor_pairs = scores.len() - metrics.genuine_pairs;
        curve = Some(c);
    }
    if !protocol.identification.is_empty() {
        let r = identification(
            &protocol.identification,
            reps,
            &targets.ranks,
            &targets.fpir,
            IdentificationMode::Open,
        )?;
        for (n, v) in r.rank {
            metrics.rank.insert(n.to_string(), v);
        }
        for (f, v) in r.tpir {
            metrics.tpir.insert(format!("{f:e}"), v);
        }
        metrics.mated_probes = r.mated;
        metrics.non_mated_probes = r.non_mated;
    }
    Ok(Evaluation {
        metrics,
        roc: curve,
    })
}

/// `threshold,tar,far` rows; the first threshold is `inf`.
pub fn format_roc(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,tar,far\n");
    for p in curve.points() {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.tar, p.far));
    }
    out
}
