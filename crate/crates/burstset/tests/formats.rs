use std::path::Path;

use burstset::features::{
    decode_bset, encode_bset, load_feature_set, parse_csv, read_matrix, write_matrix, Matrix,
};
use burstset::manifest::{load_manifest, load_sets};
use burstset::records::{format_weights, parse_weights};
use burstset::synth_io::{parse_truth, write_benchmark, TRUTH};
use burstset_core::synth::{generate, SynthConfig};
use burstset_core::{WeightKind, WeightVector};
use proptest::prelude::*;

fn small_config(seed: u64) -> SynthConfig {
    SynthConfig {
        identities: 3,
        sets_per_identity: 2,
        set_size: 6,
        d: 4,
        seed,
        ..SynthConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bset_round_trip_is_bit_exact(
        (n, d, raw) in (1usize..6, 1usize..6).prop_flat_map(|(n, d)| {
            (Just(n), Just(d), proptest::collection::vec(-1e6f32..1e6f32, n * d))
        })
    ) {
        let values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        let bytes = encode_bset(n, d, &values);
        let m = decode_bset(Path::new("p.bset"), &bytes).unwrap();
        prop_assert_eq!((m.n, m.d), (n, d));
        for (a, b) in m.values.iter().zip(&raw) {
            prop_assert_eq!(a.to_bits(), (*b as f64).to_bits());
        }
        prop_assert_eq!(encode_bset(m.n, m.d, &m.values), bytes);
    }

    #[test]
    fn csv_matrix_round_trip(raw in proptest::collection::vec(-1e3f32..1e3f32, 6)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = Matrix { n: 2, d: 3, values: raw.iter().map(|&v| v as f64).collect() };
        write_matrix(&path, &m).unwrap();
        prop_assert_eq!(read_matrix(&path).unwrap(), m);
    }

    #[test]
    fn weights_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 1..20)) {
        let w = WeightVector::new(WeightKind::Gmp, values).unwrap();
        prop_assert_eq!(parse_weights(Path::new("w.csv"), &format_weights(&w)).unwrap(), w);
    }
}

#[test]
fn csv_and_bset_hold_the_same_values() {
    let dir = tempfile::tempdir().unwrap();
    let text = "0.1,0.2,0.3\n-4,5e-3,6\n";
    let from_csv = parse_csv(Path::new("a.csv"), text).unwrap();
    let bset = dir.path().join("a.bset");
    write_matrix(&bset, &from_csv).unwrap();
    assert_eq!(read_matrix(&bset).unwrap(), from_csv);
    let set = load_feature_set(&bset, "a", "x").unwrap();
    assert_eq!(set.n(), 2);
}

#[test]
fn benchmark_directory_reloads_what_was_generated() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(5);
    let bench = generate(&config).unwrap();
    let manifest = write_benchmark(dir.path(), &config, &bench).unwrap();
    let entries = load_manifest(&manifest).unwrap();
    let sets = load_sets(&entries).unwrap();
    assert_eq!(sets.len(), bench.sets.len());
    for (loaded, original) in sets.iter().zip(&bench.sets) {
        assert_eq!(loaded.set_id(), original.set_id());
        assert_eq!(loaded.identity(), original.identity());
        assert_eq!(loaded.quality(), original.quality());
        for (a, b) in loaded.as_slice().iter().zip(original.as_slice()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }
    let truth_text = std::fs::read_to_string(dir.path().join(TRUTH)).unwrap();
    let truth = parse_truth(Path::new(TRUTH), &truth_text).unwrap();
    assert_eq!(truth, bench.truth);
}

#[test]
fn load_sets_names_the_failing_set() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(1);
    let bench = generate(&config).unwrap();
    let manifest = write_benchmark(dir.path(), &config, &bench).unwrap();
    let victim = dir.path().join("features").join("id0001_s000.bset");
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes.truncate(bytes.len() - 4);
    std::fs::write(&victim, bytes).unwrap();
    let err = load_sets(&load_manifest(&manifest).unwrap()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("id0001_s000"), "{msg}");
    assert!(msg.contains("header declares"), "{msg}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn quality_length_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(2);
    let bench = generate(&config).unwrap();
    let manifest = write_benchmark(dir.path(), &config, &bench).unwrap();
    std::fs::write(dir.path().join("quality").join("id0000_s001.txt"), "0.5\n").unwrap();
    let err = load_sets(&load_manifest(&manifest).unwrap()).unwrap_err();
    assert!(err.to_string().contains("id0000_s001"), "{err}");
}
