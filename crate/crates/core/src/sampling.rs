//! Burst-aware instance sampling.
//!
//! Burst detections are turned into per-element (or per-group) sampling
//! distributions that favor rare elements, then training instances of `n_t`
//! indices are drawn from them with an explicitly seeded RNG.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::normalize_sum;
use crate::quickshift::GroupPartition;
use crate::set::{WeightKind, WeightVector};

/// The RNG behind every seeded draw in this crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A drawn training instance: element indices into one set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub set_id: String,
    pub indices: Vec<usize>,
}

fn sampling(mut w: Vec<f64>, what: &str) -> Result<WeightVector> {
    normalize_sum(&mut w).ok_or_else(|| {
        Error::Degenerate(format!(
            "{what} sampling weights are all zero; fall back to uniform sampling"
        ))
    })?;
    WeightVector::new(WeightKind::Sampling, w)
}

/// Group probabilities proportional to `c_i^λ1`.
///
/// `λ1 = 1` reproduces uniform sampling over elements once one element is
/// drawn uniformly within the chosen group; `λ1 = 0` picks groups uniformly.
pub fn group_sampling_weights(cardinalities: &[usize], lambda1: f64) -> Result<WeightVector> {
    if cardinalities.is_empty() {
        return Err(Error::Data("no groups to sample from".into()));
    }
    if let Some(g) = cardinalities.iter().position(|&c| c == 0) {
        return Err(Error::Data(format!("group {g} has zero cardinality")));
    }
    if !(lambda1 >= 0.0 && lambda1.is_finite()) {
        return Err(Error::Parameter {
            name: "lambda1",
            reason: format!("must be a finite value >= 0, got {lambda1}"),
        });
    }
    let w = cardinalities
        .iter()
        .map(|&c| libm::pow(c as f64, lambda1))
        .collect();
    sampling(w, "group")
}

/// Element probabilities proportional to `(1 - S_i)^λ2`.
pub fn ssim_sampling_weights(s: &WeightVector, lambda2: f64) -> Result<WeightVector> {
    if s.kind() != WeightKind::SelfSim {
        return Err(Error::Contract(format!(
            "ssim sampling expects self-similarity, got {} weights",
            s.kind()
        )));
    }
    if !(lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(Error::Parameter {
            name: "lambda2",
            reason: format!("must be a finite value >= 0, got {lambda2}"),
        });
    }
    let w = s
        .values()
        .iter()
        .map(|&si| libm::pow((1.0 - si).max(0.0), lambda2))
        .collect();
    sampling(w, "self-similarity")
}

/// Element probabilities proportional to `exp(λ3 · α_i)`, evaluated with the
/// maximum exponent subtracted so nothing overflows.
pub fn gmp_sampling_weights(alpha: &WeightVector, lambda3: f64) -> Result<WeightVector> {
    if !matches!(alpha.kind(), WeightKind::Gmp | WeightKind::QaGmp) {
        return Err(Error::Contract(format!(
            "gmp sampling expects GMP weights, got {} weights",
            alpha.kind()
        )));
    }
    if !lambda3.is_finite() {
        return Err(Error::Parameter {
            name: "lambda3",
            reason: format!("must be finite, got {lambda3}"),
        });
    }
    let scaled: Vec<f64> = alpha.values().iter().map(|a| lambda3 * a).collect();
    let top = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = scaled.iter().map(|x| libm::exp(x - top)).collect();
    sampling(w, "gmp")
}

fn check_sampling(weights: &WeightVector, n_t: usize) -> Result<()> {
    if weights.kind() != WeightKind::Sampling {
        return Err(Error::Contract(format!(
            "instance drawing expects sampling weights, got {} weights",
            weights.kind()
        )));
    }
    if n_t == 0 {
        return Err(Error::Parameter {
            name: "n_t",
            reason: "instance size must be >= 1".into(),
        });
    }
    Ok(())
}

/// Sequential draw-and-renormalize without replacement. `count` must not
/// exceed the number of positive weights.
fn draw_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut remaining: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().map(|&(_, w)| w).sum();
        let mut u = rng.random::<f64>() * total;
        // fall through to the last candidate if rounding leaves u >= total
        let mut pick = remaining.len() - 1;
        for (pos, &(_, w)) in remaining.iter().enumerate() {
            if u < w {
                pick = pos;
                break;
            }
            u -= w;
        }
        out.push(remaining.remove(pick).0);
    }
    out
}

fn draw_with_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::Degenerate(format!("cannot sample from weights: {e}")))?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Draws `n_t` element indices from a sampling distribution using `rng`.
///
/// Without replacement while enough positive-weight elements exist, with
/// replacement otherwise.
pub fn draw_indices<R: Rng + ?Sized>(
    weights: &WeightVector,
    n_t: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_sampling(weights, n_t)?;
    let positive = weights.values().iter().filter(|&&w| w > 0.0).count();
    if n_t <= positive {
        Ok(draw_without_replacement(weights.values(), n_t, rng))
    } else {
        draw_with_replacement(weights.values(), n_t, rng)
    }
}

/// Seeded form of [`draw_indices`].
pub fn draw_instance(
    set_id: &str,
    weights: &WeightVector,
    n_t: usize,
    seed: u64,
) -> Result<Instance> {
    let mut rng = rng_from_seed(seed);
    Ok(Instance {
        set_id: set_id.into(),
        indices: draw_indices(weights, n_t, &mut rng)?,
    })
}

/// Picks `n_t` groups by their `c^λ1` weights, then one element uniformly
/// within each picked group.
///
/// Groups are drawn without replacement until every group has been used once,
/// after which further groups are drawn with replacement. An element already
/// taken from a repeated group is avoided while the group still has unused
/// members.
pub fn draw_group_indices<R: Rng + ?Sized>(
    partition: &GroupPartition,
    lambda1: f64,
    n_t: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n_t == 0 {
        return Err(Error::Parameter {
            name: "n_t",
            reason: "instance size must be >= 1".into(),
        });
    }
    let gw = group_sampling_weights(partition.cardinalities(), lambda1)?;
    let n_q = partition.n_groups();
    let first = n_t.min(n_q);
    let mut picked = draw_without_replacement(gw.values(), first, rng);
    if n_t > n_q {
        picked.extend(draw_with_replacement(gw.values(), n_t - n_q, rng)?);
    }

    let groups = partition.groups();
    let mut used = alloc::vec![false; partition.n()];
    let mut out = Vec::with_capacity(n_t);
    for g in picked {
        let members = &groups[g];
        let fresh: Vec<usize> = members.iter().copied().filter(|&i| !used[i]).collect();
        let pool = if fresh.is_empty() { members } else { &fresh };
        let i = pool[rng.random_range(0..pool.len())];
        used[i] = true;
        out.push(i);
    }
    Ok(out)
}

/// Seeded form of [`draw_group_indices`].
pub fn draw_group_instance(
    set_id: &str,
    partition: &GroupPartition,
    lambda1: f64,
    n_t: usize,
    seed: u64,
) -> Result<Instance> {
    let mut rng = rng_from_seed(seed);
    Ok(Instance {
        set_id: set_id.into(),
        indices: draw_group_indices(partition, lambda1, n_t, &mut rng)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn ssim(v: Vec<f64>) -> WeightVector {
        WeightVector::new(WeightKind::SelfSim, v).unwrap()
    }

    fn sampling_w(v: Vec<f64>) -> WeightVector {
        WeightVector::new(WeightKind::Sampling, v).unwrap()
    }

    #[test]
    fn group_weights_examples() {
        let w = group_sampling_weights(&[4, 1], 0.5).unwrap();
        assert!(close(w.values(), &[2.0 / 3.0, 1.0 / 3.0], 1e-15));
        let w = group_sampling_weights(&[7, 2, 1], 0.0).unwrap();
        assert!(close(w.values(), &[1.0 / 3.0; 3], 1e-15));
        let w = group_sampling_weights(&[100, 1], 1.0).unwrap();
        assert!(close(w.values(), &[100.0 / 101.0, 1.0 / 101.0], 1e-15));
        assert!(group_sampling_weights(&[3, 0], 1.0).is_err());
    }

    #[test]
    fn ssim_weights_examples() {
        let w = ssim_sampling_weights(&ssim(vec![0.0, 0.5]), 2.0).unwrap();
        assert!(close(w.values(), &[0.8, 0.2], 1e-15));
        let w = ssim_sampling_weights(&ssim(vec![1.0, 0.0]), 2.0).unwrap();
        assert_eq!(w.values()[0], 0.0);
    }

    #[test]
    fn ssim_all_bursty_is_degenerate() {
        assert!(matches!(
            ssim_sampling_weights(&ssim(vec![1.0, 1.0]), 2.0),
            Err(Error::Degenerate(msg)) if msg.contains("uniform")
        ));
    }

    #[test]
    fn gmp_weights_examples() {
        let a = WeightVector::new(WeightKind::Gmp, vec![0.0, 0.0]).unwrap();
        for l3 in [-3.0, 0.0, 10.0] {
            assert!(close(
                gmp_sampling_weights(&a, l3).unwrap().values(),
                &[0.5, 0.5],
                1e-15
            ));
        }
        let a = WeightVector::new(WeightKind::Gmp, vec![0.1, 0.0]).unwrap();
        let e = core::f64::consts::E;
        let w = gmp_sampling_weights(&a, 10.0).unwrap();
        assert!(close(w.values(), &[e / (e + 1.0), 1.0 / (e + 1.0)], 1e-15));
    }

    #[test]
    fn gmp_weights_do_not_overflow() {
        let a = WeightVector::new(WeightKind::Gmp, vec![1e4, 0.0, 1e4]).unwrap();
        let w = gmp_sampling_weights(&a, 10.0).unwrap();
        assert!(close(w.values(), &[0.5, 0.0, 0.5], 1e-15));
    }

    #[test]
    fn draw_zero_weight_never_chosen() {
        let w = sampling_w(vec![1.0, 0.0]);
        for seed in 0..50 {
            assert_eq!(draw_instance("s", &w, 1, seed).unwrap().indices, vec![0]);
        }
    }

    #[test]
    fn draw_exhausting_uniform_is_permutation() {
        let w = sampling_w(vec![0.25; 4]);
        for seed in 0..20 {
            let mut idx = draw_instance("s", &w, 4, seed).unwrap().indices;
            idx.sort_unstable();
            assert_eq!(idx, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn draw_falls_back_to_replacement() {
        let w = sampling_w(vec![0.5, 0.5, 0.0]);
        let inst = draw_instance("s", &w, 5, 7).unwrap();
        assert_eq!(inst.indices.len(), 5);
        assert!(inst.indices.iter().all(|&i| i < 2));
    }

    #[test]
    fn draw_rejects_zero_size() {
        let w = sampling_w(vec![1.0]);
        assert!(matches!(
            draw_instance("s", &w, 0, 1),
            Err(Error::Parameter { name: "n_t", .. })
        ));
    }

    #[test]
    fn group_instance_covers_groups_first() {
        let p = GroupPartition::new(vec![0, 0, 0, 1, 2]).unwrap();
        let inst = draw_group_instance("s", &p, 0.5, 3, 11).unwrap();
        let mut groups: Vec<usize> = inst.indices.iter().map(|&i| p.group_of(i)).collect();
        groups.sort_unstable();
        assert_eq!(groups, vec![0, 1, 2]);
        let big = draw_group_instance("s", &p, 0.5, 8, 11).unwrap();
        assert_eq!(big.indices.len(), 8);
    }
}
