use burstset_core::aggregate::{
    pairwise_similarity, quality_scores, two_stage_aggregate, weighted_aggregate, QualitySource,
};
use burstset_core::burst::{gram, qagmp_weights};
use burstset_core::sampling::rng_from_seed;
use burstset_core::synth::{identity_modes, sample_set, SetRecipe};
use burstset_core::{FeatureSet, GroupPartition, WeightKind, WeightVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn centroid(set: &FeatureSet, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; set.d()];
    for &i in members {
        for (acc, x) in c.iter_mut().zip(set.row(i)) {
            *acc += x;
        }
    }
    c
}

#[test]
fn weighted_aggregate_matches_explicit_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let values: Vec<f64> = (0..7 * 5).map(|_| rng.sample(StandardNormal)).collect();
        let s = FeatureSet::new("s", "x", 5, values)
            .unwrap()
            .normalize()
            .unwrap();
        let a: Vec<f64> = (0..7).map(|_| rng.random_range(0.01..1.0)).collect();
        let g: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..2.0)).collect();
        let att = WeightVector::new(WeightKind::Attention, a.clone()).unwrap();
        let gmp = WeightVector::new(WeightKind::Gmp, g.clone()).unwrap();
        let rep = weighted_aggregate(&s, &[&att, &gmp]).unwrap();
        let mut f = vec![0.0; 5];
        for i in 0..7 {
            for (fc, x) in f.iter_mut().zip(s.row(i)) {
                *fc += a[i] * g[i] * x;
            }
        }
        let len: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (got, want) in rep.vector.iter().zip(&f) {
            assert!((got - want / len).abs() < 1e-12);
        }
        assert!((rep.vector.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn two_stage_equalizes_a_nine_to_one_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut rows = Vec::new();
    for axis in [0; 9].into_iter().chain([1]) {
        let mut v = vec![0.0; 8];
        v[axis] = 1.0;
        for x in v.iter_mut() {
            *x += 0.001 * rng.sample::<f64, _>(StandardNormal);
        }
        rows.push(v);
    }
    let s = FeatureSet::from_rows("s", "x", &rows)
        .unwrap()
        .normalize()
        .unwrap();
    let p = GroupPartition::new([0; 9].into_iter().chain([1]).collect()).unwrap();
    let two = two_stage_aggregate(&s, &p).unwrap();
    let half = 1.0 / 2f64.sqrt();
    assert!((two.vector[0] - half).abs() < 1e-2 && (two.vector[1] - half).abs() < 1e-2);
    let mean = weighted_aggregate(&s, &[]).unwrap();
    assert!(mean.vector[0].clamp(-1.0, 1.0).acos().to_degrees() < 20.0);
}

fn minority_gains(quality_link: f64, seed: u64, check: impl Fn(&FeatureSet, &[usize]) -> Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let recipe = SetRecipe {
        size: 20,
        skew: 9f64.log2(),
        noise: 0.1,
        quality_link,
    };
    for trial in 0..20 {
        let modes = identity_modes(&mut rng, 32, 2, 1.5);
        let (raw, labels) = sample_set(&mut rng, "s", "x", &modes, &recipe).unwrap();
        let s = raw.normalize().unwrap();
        let minority_label = if labels.iter().filter(|&&l| l == 0).count() < 10 {
            0
        } else {
            1
        };
        let minority: Vec<usize> = (0..20).filter(|&i| labels[i] == minority_label).collect();
        assert_eq!(minority.len(), 2);
        let target = centroid(&s, &minority);
        let mean = weighted_aggregate(&s, &[]).unwrap();
        let rep = check(&s, &labels);
        assert!(
            cos(&rep, &target) > cos(&mean.vector, &target),
            "trial {trial}"
        );
    }
}

#[test]
fn two_stage_moves_toward_the_minority_mode() {
    minority_gains(0.5, 33, |s, labels| {
        two_stage_aggregate(s, &GroupPartition::new(labels.to_vec()).unwrap())
            .unwrap()
            .vector
    });
}

#[test]
fn qagmp_moves_toward_the_minority_mode_under_uniform_quality() {
    minority_gains(0.0, 34, |s, _| {
        let att = quality_scores(s, &QualitySource::Manifest).unwrap();
        let qag = qagmp_weights(&gram(s).unwrap(), 1.0, 5.0, &att).unwrap();
        weighted_aggregate(s, &[&att, &qag]).unwrap().vector
    });
}

#[test]
fn attention_only_is_the_attention_weighted_sum() {
    let s = FeatureSet::from_rows("s", "x", &[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap();
    let att = WeightVector::new(WeightKind::Attention, vec![0.2, 0.9, 0.5]).unwrap();
    let rep = weighted_aggregate(&s, &[&att]).unwrap();
    let f: [f64; 2] = [0.2 + 0.5 * 0.6, 0.9 + 0.5 * 0.8];
    let len = (f[0] * f[0] + f[1] * f[1]).sqrt();
    assert!((rep.vector[0] - f[0] / len).abs() < 1e-15);
    assert!((rep.vector[1] - f[1] / len).abs() < 1e-15);
    assert_eq!(rep.method, "attention");
}

#[test]
fn similarity_is_a_dot_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let a: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();
    let ra = burstset_core::SetRepresentation::from_aggregate("a", &a, "m").unwrap();
    let rb = burstset_core::SetRepresentation::from_aggregate("b", &b, "m").unwrap();
    let want: f64 = ra.vector.iter().zip(&rb.vector).map(|(x, y)| x * y).sum();
    assert!((pairwise_similarity(&ra, &rb).unwrap() - want).abs() < 1e-12);
    assert!((pairwise_similarity(&ra, &rb).unwrap() - cos(&a, &b)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn aggregates_ignore_row_order(
        rows in prop::collection::vec(prop::collection::vec(0.05f64..1.0, 6), 2..12),
        weights in prop::collection::vec(0.01f64..1.0, 12),
        groups in prop::collection::vec(0usize..3, 12),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let n = rows.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        let a = FeatureSet::from_rows("a", "x", &rows).unwrap().normalize().unwrap();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let b = FeatureSet::from_rows("b", "x", &permuted).unwrap().normalize().unwrap();

        let wa = WeightVector::new(WeightKind::Attention, weights[..n].to_vec()).unwrap();
        let wb = WeightVector::new(WeightKind::Attention, perm.iter().map(|&i| weights[i]).collect()).unwrap();
        let ra = weighted_aggregate(&a, &[&wa]).unwrap();
        let rb = weighted_aggregate(&b, &[&wb]).unwrap();
        for (x, y) in ra.vector.iter().zip(&rb.vector) {
            prop_assert!((x - y).abs() < 1e-12);
        }

        let mut relabel = std::collections::BTreeMap::new();
        let dense: Vec<usize> = groups[..n]
            .iter()
            .map(|g| { let next = relabel.len(); *relabel.entry(*g).or_insert(next) })
            .collect();
        let pa = GroupPartition::new(dense.clone()).unwrap();
        let mut seen = std::collections::BTreeMap::new();
        let pb_labels: Vec<usize> = perm
            .iter()
            .map(|&i| { let next = seen.len(); *seen.entry(dense[i]).or_insert(next) })
            .collect();
        let pb = GroupPartition::new(pb_labels).unwrap();
        let ta = two_stage_aggregate(&a, &pa).unwrap();
        let tb = two_stage_aggregate(&b, &pb).unwrap();
        for (x, y) in ta.vector.iter().zip(&tb.vector) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((ta.vector.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-6);
    }
}
