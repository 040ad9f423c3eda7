use burstset_core::burst::{
    burst_degree, gmp_representation, gmp_weights, gram, power_normalize, qagmp_weights,
    self_similarity, weighted_sum, GramMatrix,
};
use burstset_core::{FeatureSet, WeightKind, WeightVector};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureSet {
    let values: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    FeatureSet::new("r", "id", d, values)
        .unwrap()
        .normalize()
        .unwrap()
}

fn matrix(set: &FeatureSet) -> DMatrix<f64> {
    DMatrix::from_row_slice(set.n(), set.d(), set.as_slice())
}

fn lu_solve(a: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    a.lu().solve(&b).expect("oracle system is nonsingular")
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(f64::MIN_POSITIVE)
}

fn att(values: Vec<f64>) -> WeightVector {
    WeightVector::new(WeightKind::Attention, values).unwrap()
}

#[test]
fn gram_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, d) in [(4, 3), (7, 16), (12, 5)] {
        let s = random_set(&mut rng, n, d);
        let k = gram(&s).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut expect = 0.0;
                for c in 0..d {
                    expect += s.row(i)[c] * s.row(j)[c];
                }
                assert!((k.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn self_similarity_and_degree_match_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_set(&mut rng, 6, 6);
    let k = gram(&s).unwrap();
    let sim = self_similarity(&k);
    let mut total = 0.0;
    for i in 0..6 {
        let row: f64 = (0..6).map(|j| k.get(i, j)).sum();
        total += row;
        assert!((sim.values()[i] - row / 6.0).abs() < 1e-12);
    }
    assert!((burst_degree(&k) - total / 36.0).abs() < 1e-12);
}

#[test]
fn gmp_matches_lu_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let s = random_set(&mut rng, 8, 8);
        let k = gram(&s).unwrap();
        let lambda = rng.random_range(0.01..2.0);
        let alpha = gmp_weights(&k, lambda).unwrap();
        let x = matrix(&s);
        let system = &x * x.transpose() + DMatrix::identity(8, 8) * lambda;
        let expect = lu_solve(system, DVector::from_element(8, 1.0));
        assert!(rel_err(alpha.values(), expect.as_slice()) < 1e-10);
    }
}

#[test]
fn qagmp_matches_lu_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let s = random_set(&mut rng, 8, 12);
        let k = gram(&s).unwrap();
        let a: Vec<f64> = (0..8).map(|_| rng.random_range(0.05..1.0)).collect();
        let lambda4 = rng.random_range(0.0..10.0);
        let alpha = qagmp_weights(&k, 1.0, lambda4, &att(a.clone())).unwrap();
        let x = matrix(&s);
        let system = &x * x.transpose() + DMatrix::identity(8, 8);
        let rhs = DVector::from_iterator(8, a.iter().map(|v| 1.0 + lambda4 * v));
        let expect = lu_solve(system, rhs);
        assert!(rel_err(alpha.values(), expect.as_slice()) < 1e-10);
    }
}

#[test]
fn dual_route_matches_ridge_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let (n, d) = (rng.random_range(2..12), rng.random_range(2..20));
        let s = random_set(&mut rng, n, d);
        let lambda = [1e-3, 0.1, 1.0, 10.0][i % 4];
        let alpha = gmp_weights(&gram(&s).unwrap(), lambda).unwrap();
        let dual = weighted_sum(&s, alpha.values()).unwrap();
        let x = matrix(&s);
        let normal = x.transpose() * &x + DMatrix::identity(d, d) * lambda;
        let primal = lu_solve(normal, x.transpose() * DVector::from_element(n, 1.0));
        assert!(
            rel_err(&dual, primal.as_slice()) < 1e-8,
            "instance {i}: n={n} d={d} λ={lambda}"
        );
    }
}

#[test]
fn gmp_equalizes_similarities() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let s = random_set(&mut rng, 10, 32);
        let alpha = gmp_weights(&gram(&s).unwrap(), 1e-6).unwrap();
        let f = weighted_sum(&s, alpha.values()).unwrap();
        for row in s.rows() {
            let sim: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((sim - 1.0).abs() < 1e-4);
        }
    }
}

#[test]
fn qagmp_diagonal_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.random_range(1..10);
        let lambda = rng.random_range(0.1..5.0);
        let lambda4 = rng.random_range(0.0..10.0);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let alpha =
            qagmp_weights(&GramMatrix::identity(n), lambda, lambda4, &att(a.clone())).unwrap();
        for (got, ai) in alpha.values().iter().zip(&a) {
            assert!((got - (1.0 + lambda4 * ai) / (1.0 + lambda)).abs() < 1e-12);
        }
    }
}

#[test]
fn qagmp_without_quality_term_is_gmp() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let s = random_set(&mut rng, 9, 7);
        let k = gram(&s).unwrap();
        let a = att((0..9).map(|_| rng.random_range(0.01..1.0)).collect());
        let plain = gmp_weights(&k, 0.5).unwrap();
        let reduced = qagmp_weights(&k, 0.5, 0.0, &a).unwrap();
        assert_eq!(plain.values(), reduced.values());
    }
}

#[test]
fn burst_degree_drops_when_duplicates_become_orthogonal() {
    let d = 8;
    let e = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let dup = FeatureSet::from_rows("dup", "x", &[e(0), e(0), e(0), e(1)]).unwrap();
    let ortho = FeatureSet::from_rows("orth", "x", &[e(0), e(2), e(3), e(1)]).unwrap();
    let hi = burst_degree(&gram(&dup).unwrap());
    let lo = burst_degree(&gram(&ortho).unwrap());
    assert!((hi - 10.0 / 16.0).abs() < 1e-15);
    assert!((lo - 0.25).abs() < 1e-15);
}

#[test]
fn power_normalize_matches_elementwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let v: Vec<f64> = (0..16).map(|_| rng.sample(StandardNormal)).collect();
        let out = power_normalize(&v, 0.5).unwrap();
        let raw: Vec<f64> = v.iter().map(|x| x.signum() * x.abs().sqrt()).collect();
        let len: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (o, r) in out.iter().zip(&raw) {
            assert!((o - r / len).abs() < 1e-12);
        }
    }
}

fn rows_strategy(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n).prop_filter(
        "rows must be nonzero",
        |rows| {
            rows.iter()
                .all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        },
    )
}

fn unit_gmp(set: &FeatureSet, lambda: f64) -> Vec<f64> {
    let alpha = gmp_weights(&gram(set).unwrap(), lambda).unwrap();
    gmp_representation(set, &alpha).unwrap().vector
}

fn unit_mean(set: &FeatureSet) -> Vec<f64> {
    let f = weighted_sum(set, &vec![1.0; set.n()]).unwrap();
    let len: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    f.iter().map(|x| x / len).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn duplicate_row_leaves_gmp_but_pulls_mean(rows in rows_strategy(5, 16), pick in 0usize..5) {
        let base = FeatureSet::from_rows("b", "x", &rows).unwrap().normalize().unwrap();
        let mut grown = rows.clone();
        grown.push(rows[pick].clone());
        let dup = FeatureSet::from_rows("d", "x", &grown).unwrap().normalize().unwrap();

        prop_assert!(dist(&unit_gmp(&base, 1e-6), &unit_gmp(&dup, 1e-6)) < 1e-3);

        let target = base.row(pick);
        let before = unit_mean(&base);
        let after = unit_mean(&dup);
        let cos = |v: &[f64]| v.iter().zip(target).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!(cos(&after) > cos(&before));
    }

    #[test]
    fn permuting_rows_permutes_alpha(rows in rows_strategy(6, 5), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let a = FeatureSet::from_rows("a", "x", &rows).unwrap().normalize().unwrap();
        let b = FeatureSet::from_rows("b", "x", &permuted).unwrap().normalize().unwrap();
        let alpha_a = gmp_weights(&gram(&a).unwrap(), 1.0).unwrap();
        let alpha_b = gmp_weights(&gram(&b).unwrap(), 1.0).unwrap();
        for (pos, &src) in perm.iter().enumerate() {
            prop_assert!((alpha_b.values()[pos] - alpha_a.values()[src]).abs() < 1e-12);
        }
        let fa = gmp_representation(&a, &alpha_a).unwrap().vector;
        let fb = gmp_representation(&b, &alpha_b).unwrap().vector;
        prop_assert!(dist(&fa, &fb) < 1e-12);
    }

    #[test]
    fn qagmp_diagonal_is_increasing_in_attention(
        a in prop::collection::vec(0.01f64..1.0, 2..12),
        lambda4 in 0.1f64..10.0,
    ) {
        let n = a.len();
        let alpha = qagmp_weights(&GramMatrix::identity(n), 1.0, lambda4, &att(a.clone())).unwrap();
        for i in 0..n {
            for j in 0..n {
                if a[i] < a[j] {
                    prop_assert!(alpha.values()[i] < alpha.values()[j]);
                }
            }
        }
    }
}
