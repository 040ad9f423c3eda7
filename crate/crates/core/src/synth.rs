//! Synthetic benchmarks with planted burstiness.
//!
//! Each identity owns a mean direction on the unit sphere and a handful of
//! mode directions scattered around it. A set draws its elements from those
//! modes with Zipf-skewed cardinalities (the dominant mode differs from set to
//! set), adds Gaussian noise, and renormalizes. Per-element noise is inflated
//! by a random "degradation" factor that is also written out as the element's
//! quality and as its stored row norm, so quality-aware methods have a ground
//! truth to recover.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::math;
use crate::protocol::{EvalProtocol, IdentificationEntry, PairLabel, VerificationPair};
use crate::sampling::{rng_from_seed, SeededRng};
use crate::set::FeatureSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub identities: usize,
    pub sets_per_identity: usize,
    /// Elements per set.
    pub set_size: usize,
    pub d: usize,
    pub modes_per_identity: usize,
    /// Zipf exponent over mode ranks; `log2(9)` gives a 90/10 split of two modes.
    pub mode_cardinality_skew: f64,
    /// Scale of the random offset between an identity's mean and its modes.
    pub mode_spread: f64,
    /// Per-coordinate standard deviation of element noise.
    pub intra_mode_noise: f64,
    /// How strongly element degradation inflates noise and lowers quality.
    pub quality_noise_link: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            identities: 20,
            sets_per_identity: 4,
            set_size: 20,
            d: 32,
            modes_per_identity: 2,
            mode_cardinality_skew: libm::log2(9.0),
            mode_spread: 1.0,
            intra_mode_noise: 0.2,
            quality_noise_link: 4.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("identities", self.identities),
            ("sets_per_identity", self.sets_per_identity),
            ("set_size", self.set_size),
            ("d", self.d),
            ("modes_per_identity", self.modes_per_identity),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, c)| *c == 0) {
            return Err(Error::Config(format!(
                "`{name}` must be >= 1; a zero count produces empty sets"
            )));
        }
        if self.identities < 2 || self.sets_per_identity < 2 {
            return Err(Error::Config(
                "need at least 2 identities and 2 sets per identity so the verification \
                 protocol has both genuine and impostor pairs"
                    .into(),
            ));
        }
        if self.mode_cardinality_skew.is_nan() || self.mode_cardinality_skew < 1.0 {
            return Err(Error::Config(format!(
                "`mode_cardinality_skew` must be >= 1, got {}",
                self.mode_cardinality_skew
            )));
        }
        if !(self.intra_mode_noise > 0.0 && self.intra_mode_noise.is_finite()) {
            return Err(Error::Config(
                "`intra_mode_noise` must be a finite value > 0".into(),
            ));
        }
        if !(self.quality_noise_link >= 0.0 && self.quality_noise_link.is_finite()) {
            return Err(Error::Config(
                "`quality_noise_link` must be a finite value >= 0".into(),
            ));
        }
        if !(self.mode_spread >= 0.0 && self.mode_spread.is_finite()) {
            return Err(Error::Config(
                "`mode_spread` must be a finite value >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Planted structure of one generated set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetTruth {
    pub set_id: String,
    pub identity: String,
    /// Mode index (within the identity) of every element.
    pub mode_labels: Vec<usize>,
    /// Probability that two elements drawn with replacement share a mode,
    /// `Σ_m (c_m / n)²`.
    pub redundancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub sets: Vec<FeatureSet>,
    pub protocol: EvalProtocol,
    pub truth: Vec<SetTruth>,
}

/// How one set is drawn from its identity's modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetRecipe {
    pub size: usize,
    pub skew: f64,
    pub noise: f64,
    pub quality_link: f64,
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = math::unit(&v) {
            return u;
        }
    }
}

/// Mean direction plus `count` modes offset from it by `spread` times a random
/// unit vector, each renormalized.
pub fn identity_modes<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    count: usize,
    spread: f64,
) -> Vec<Vec<f64>> {
    let mean = random_unit(rng, d);
    (0..count)
        .map(|_| {
            let offset = random_unit(rng, d);
            let raw: Vec<f64> = mean
                .iter()
                .zip(&offset)
                .map(|(m, o)| m + spread * o)
                .collect();
            math::unit(&raw).unwrap_or_else(|| mean.clone())
        })
        .collect()
}

/// Splits `n` elements over `modes` ranks in proportion to `1 / r^skew`,
/// largest remainders first (lower rank on ties).
pub fn zipf_counts(n: usize, modes: usize, skew: f64) -> Vec<usize> {
    let weights: Vec<f64> = (1..=modes).map(|r| libm::pow(r as f64, -skew)).collect();
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| libm::floor(*e) as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..modes).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - counts[a] as f64, exact[b] - counts[b] as f64);
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &r in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[r] += 1;
        rest -= 1;
    }
    counts
}

fn redundancy(labels: &[usize], modes: usize) -> f64 {
    let mut counts = vec![0usize; modes];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 / n) * (c as f64 / n))
        .sum()
}

/// Draws one set from `modes`. The mode that receives the largest share is
/// chosen at random, so sets of one identity are dominated by different modes.
pub fn sample_set<R: Rng + ?Sized>(
    rng: &mut R,
    set_id: &str,
    identity: &str,
    modes: &[Vec<f64>],
    recipe: &SetRecipe,
) -> Result<(FeatureSet, Vec<usize>)> {
    if recipe.size == 0 || modes.is_empty() {
        return Err(Error::Config(format!("set `{set_id}` would be empty")));
    }
    let d = modes[0].len();
    let mut rank_to_mode: Vec<usize> = (0..modes.len()).collect();
    rank_to_mode.shuffle(rng);
    let counts = zipf_counts(recipe.size, modes.len(), recipe.skew);
    let mut labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(r, &c)| core::iter::repeat_n(rank_to_mode[r], c))
        .collect();
    labels.shuffle(rng);

    let mut features = Vec::with_capacity(recipe.size * d);
    let mut quality = Vec::with_capacity(recipe.size);
    for &m in &labels {
        let degradation: f64 = Exp1.sample(rng);
        let sigma = recipe.noise * (1.0 + recipe.quality_link * degradation);
        let q = 1.0 / (1.0 + recipe.quality_link * degradation);
        let raw: Vec<f64> = modes[m]
            .iter()
            .map(|x| {
                let z: f64 = StandardNormal.sample(rng);
                x + sigma * z
            })
            .collect();
        let dir = math::unit(&raw).unwrap_or_else(|| modes[m].clone());
        features.extend(dir.iter().map(|x| x * q));
        quality.push(q);
    }
    let set = FeatureSet::new(set_id, identity, d, features)?.with_quality(quality)?;
    Ok((set, labels))
}

pub fn identity_name(i: usize) -> String {
    format!("id{i:04}")
}

pub fn set_name(identity: usize, set: usize) -> String {
    format!("id{identity:04}_s{set:03}")
}

/// Generates a full benchmark: sets, ground truth, an all-pairs verification
/// protocol and an open-set identification protocol.
///
/// The first set of every identity is enrolled in the gallery, except for the
/// last `identities / 10` identities, whose sets are all non-mated probes.
pub fn generate(config: &SynthConfig) -> Result<Benchmark> {
    config.validate()?;
    let mut rng: SeededRng = rng_from_seed(config.seed);
    let recipe = SetRecipe {
        size: config.set_size,
        skew: config.mode_cardinality_skew,
        noise: config.intra_mode_noise,
        quality_link: config.quality_noise_link,
    };
    let mut sets = Vec::new();
    let mut truth = Vec::new();
    for i in 0..config.identities {
        let modes = identity_modes(
            &mut rng,
            config.d,
            config.modes_per_identity,
            config.mode_spread,
        );
        let identity = identity_name(i);
        for s in 0..config.sets_per_identity {
            let set_id = set_name(i, s);
            let (set, labels) = sample_set(&mut rng, &set_id, &identity, &modes, &recipe)?;
            truth.push(SetTruth {
                set_id,
                identity: identity.clone(),
                redundancy: redundancy(&labels, modes.len()),
                mode_labels: labels,
            });
            sets.push(set);
        }
    }

    let mut pairs = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let same = sets[a].identity() == sets[b].identity();
            pairs.push(VerificationPair {
                a: sets[a].set_id().into(),
                b: sets[b].set_id().into(),
                label: if same {
                    PairLabel::Same
                } else {
                    PairLabel::Different
                },
            });
        }
    }
    let held_out = config.identities / 10;
    let enrolled = config.identities - held_out;
    let identification = sets
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let (i, k) = (
                idx / config.sets_per_identity,
                idx % config.sets_per_identity,
            );
            IdentificationEntry {
                set_id: s.set_id().into(),
                gallery: k == 0 && i < enrolled,
                identity: s.identity().into(),
            }
        })
        .collect();

    Ok(Benchmark {
        sets,
        protocol: EvalProtocol {
            pairs,
            identification,
        },
        truth,
    })
}

/// `n` points around the first `modes` coordinate axes with per-coordinate
/// noise `sigma`, renormalized. Returns the set and the planted labels.
pub fn orthogonal_mixture(
    n: usize,
    d: usize,
    modes: usize,
    sigma: f64,
    seed: u64,
) -> Result<(FeatureSet, Vec<usize>)> {
    if modes == 0 || modes > d || n < modes {
        return Err(Error::Config(format!(
            "cannot plant {modes} orthogonal modes with n = {n}, d = {d}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut labels: Vec<usize> = (0..n).map(|i| i % modes).collect();
    labels.shuffle(&mut rng);
    let mut features = Vec::with_capacity(n * d);
    for &m in &labels {
        let raw: Vec<f64> = (0..d)
            .map(|j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let axis = if j == m { 1.0 } else { 0.0 };
                axis + sigma * z
            })
            .collect();
        features.extend(math::unit(&raw).unwrap_or_else(|| raw.clone()));
    }
    Ok((
        FeatureSet::new(format!("mixture{seed}"), "mixture", d, features)?,
        labels,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zipf_allocation() {
        assert_eq!(zipf_counts(20, 2, libm::log2(9.0)), vec![18, 2]);
        assert_eq!(zipf_counts(10, 3, 1e6), vec![10, 0, 0]);
        assert_eq!(zipf_counts(7, 7, 1.0).iter().sum::<usize>(), 7);
    }

    #[test]
    fn config_validation() {
        assert!(SynthConfig::default().validate().is_ok());
        let bad = SynthConfig {
            set_size: 0,
            ..Default::default()
        };
        assert!(matches!(generate(&bad), Err(Error::Config(_))));
        let one = SynthConfig {
            sets_per_identity: 1,
            ..Default::default()
        };
        assert!(generate(&one).is_err());
        let skew = SynthConfig {
            mode_cardinality_skew: 0.5,
            ..Default::default()
        };
        assert!(skew.validate().is_err());
    }

    #[test]
    fn generate_is_deterministic() {
        let c = SynthConfig {
            identities: 3,
            sets_per_identity: 2,
            set_size: 6,
            ..Default::default()
        };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = SynthConfig {
            seed: 1,
            ..c.clone()
        };
        assert_ne!(generate(&c).unwrap().sets, generate(&other).unwrap().sets);
    }

    #[test]
    fn quality_is_stored_as_row_norm() {
        let c = SynthConfig {
            identities: 2,
            sets_per_identity: 2,
            set_size: 5,
            ..Default::default()
        };
        let b = generate(&c).unwrap();
        for s in &b.sets {
            for (norm, q) in s.row_norms().iter().zip(s.quality().unwrap()) {
                assert!((norm - q).abs() < 1e-12);
            }
        }
    }
}
