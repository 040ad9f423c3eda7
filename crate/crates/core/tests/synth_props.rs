use burstset_core::burst::{burst_degree, gram};
use burstset_core::eval::adjusted_rand_index;
use burstset_core::quickshift::quickshiftpp;
use burstset_core::sampling::rng_from_seed;
use burstset_core::synth::{
    generate, identity_modes, orthogonal_mixture, sample_set, SetRecipe, SynthConfig,
};
use burstset_core::PairLabel;
use proptest::prelude::*;

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn orthogonal_modes_keep_their_labels() {
    for seed in 0..10 {
        let (s, labels) = orthogonal_mixture(60, 12, 3, 0.05, seed).unwrap();
        let mut centroids = vec![vec![0.0; 12]; 3];
        for (i, &l) in labels.iter().enumerate() {
            for (c, x) in centroids[l].iter_mut().zip(s.row(i)) {
                *c += x;
            }
        }
        for a in 0..3 {
            for b in a + 1..3 {
                assert!(cos(&centroids[a], &centroids[b]) < 0.2);
            }
        }
        for i in 0..60 {
            for j in i + 1..60 {
                if labels[i] == labels[j] {
                    assert!(cos(s.row(i), s.row(j)) > 0.9, "seed {seed}: {i},{j}");
                }
            }
        }
    }
}

#[test]
fn vanishing_noise_is_recovered_exactly() {
    let (s, labels) = orthogonal_mixture(40, 10, 4, 1e-6, 5).unwrap();
    let p = quickshiftpp(&s, 6, 0.3).unwrap();
    assert_eq!(adjusted_rand_index(p.assignments(), &labels).unwrap(), 1.0);
}

#[test]
fn extreme_skew_gives_single_mode_sets() {
    let mut rng = rng_from_seed(51);
    let modes = identity_modes(&mut rng, 16, 3, 1.0);
    let recipe = SetRecipe {
        size: 30,
        skew: 60.0,
        noise: 0.02,
        quality_link: 0.0,
    };
    let (s, labels) = sample_set(&mut rng, "s", "x", &modes, &recipe).unwrap();
    assert!(labels.iter().all(|&l| l == labels[0]));
    let degree = burst_degree(&gram(&s.normalize().unwrap()).unwrap());
    assert!(degree > 0.9, "degree {degree}");
}

#[test]
fn quality_falls_as_noise_grows() {
    let b = generate(&SynthConfig::default()).unwrap();
    for s in &b.sets {
        let q = s.quality().unwrap();
        for (qi, norm) in q.iter().zip(s.row_norms()) {
            assert!(*qi > 0.0 && *qi <= 1.0);
            assert!((qi - norm).abs() < 1e-12);
        }
    }
}

#[test]
fn benchmark_shape_follows_config() {
    let cfg = SynthConfig::default();
    let b = generate(&cfg).unwrap();
    assert_eq!(b.sets.len(), cfg.identities * cfg.sets_per_identity);
    assert_eq!(b.truth.len(), b.sets.len());
    let n = b.sets.len();
    assert_eq!(b.protocol.pairs.len(), n * (n - 1) / 2);
    for (s, t) in b.sets.iter().zip(&b.truth) {
        assert_eq!(s.set_id(), t.set_id);
        assert_eq!(s.n(), cfg.set_size);
        assert_eq!(s.d(), cfg.d);
        assert_eq!(t.mode_labels.len(), s.n());
        // a 90/10 split of 20 elements
        assert!((t.redundancy - (0.81 + 0.01)).abs() < 1e-12);
    }
    let enrolled = b
        .protocol
        .identification
        .iter()
        .filter(|e| e.gallery)
        .count();
    assert_eq!(enrolled, cfg.identities - cfg.identities / 10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_deterministic_and_has_both_labels(
        seed in any::<u64>(),
        identities in 2usize..6,
        sets in 2usize..4,
        modes in 1usize..4,
    ) {
        let cfg = SynthConfig {
            identities,
            sets_per_identity: sets,
            modes_per_identity: modes,
            set_size: 8,
            d: 6,
            seed,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.protocol.pairs.iter().any(|p| p.label == PairLabel::Same));
        prop_assert!(a.protocol.pairs.iter().any(|p| p.label == PairLabel::Different));
        for t in &a.truth {
            prop_assert!(t.redundancy > 0.0 && t.redundancy <= 1.0);
        }
    }
}
