use ecgnet::data::{
    batches, load_beats_csv, stratified_split, synth, write_beats_csv, BeatRecord, Dataset,
    LabelMap, DEFAULT_RATIOS,
};
use proptest::prelude::*;
use std::collections::BTreeSet;

/// Expected test-partition supports for the full 5-class and 2-class databases.
const MIT_BIH_TEST_SUPPORT: [usize; 5] = [18_118, 556, 1_448, 162, 1_608];
const PTB_TEST_SUPPORT: [usize; 2] = [809, 2_102];

/// One-sample records whose value encodes the record's identity.
fn tagged(counts: &[usize]) -> Dataset {
    let mut records = Vec::new();
    let mut id = 0u32;
    for (label, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            records.push(BeatRecord {
                samples: vec![f32::from_bits(id)],
                label,
            });
            id += 1;
        }
    }
    Dataset::new(records, LabelMap::for_classes(counts.len())).unwrap()
}

fn ids(ds: &Dataset) -> Vec<u32> {
    ds.records().iter().map(|r| r.samples[0].to_bits()).collect()
}

fn assert_supports_within_1pct(ds: &Dataset, want: &[usize]) {
    let split = stratified_split(ds, DEFAULT_RATIOS, 42).unwrap();
    let got = split.test.class_distribution();
    for (class, &w) in want.iter().enumerate() {
        let g = got[&class] as f64;
        assert!((g - w as f64).abs() <= 0.01 * w as f64, "class {class}: {g} vs {w}");
    }
}

#[test]
fn full_mit_bih_counts_give_expected_test_supports() {
    assert_supports_within_1pct(&tagged(&synth::MIT_BIH_CLASS_TOTALS), &MIT_BIH_TEST_SUPPORT);
}

#[test]
fn full_ptb_counts_give_expected_test_supports() {
    assert_supports_within_1pct(&tagged(&synth::PTB_CLASS_TOTALS), &PTB_TEST_SUPPORT);
}

#[test]
#[ignore = "needs the MIT-BIH beat CSV: set ECG_MITBIH_CSV"]
fn real_mit_bih_split_supports() {
    let path = std::env::var("ECG_MITBIH_CSV").expect("ECG_MITBIH_CSV not set");
    let ds = load_beats_csv(path, 187, true).unwrap();
    assert_supports_within_1pct(&ds, &MIT_BIH_TEST_SUPPORT);
}

#[test]
#[ignore = "needs the PTB beat CSV: set ECG_PTB_CSV"]
fn real_ptb_split_supports() {
    let path = std::env::var("ECG_PTB_CSV").expect("ECG_PTB_CSV not set");
    let ds = load_beats_csv(path, 187, true).unwrap();
    assert_supports_within_1pct(&ds, &PTB_TEST_SUPPORT);
}

#[test]
fn csv_load_is_order_preserving_and_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beats.csv");
    let ds = synth::mit_bih_like(120, 187, 3);
    write_beats_csv(&ds, &path).unwrap();
    let a = load_beats_csv(&path, 187, true).unwrap();
    let b = load_beats_csv(&path, 187, true).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records(), ds.records());
    assert!(a.records().iter().flat_map(|r| &r.samples).all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn distribution_invariant_under_split_shuffle() {
    let ds = synth::ptb_like(300, 187, 1);
    let split = stratified_split(&ds, DEFAULT_RATIOS, 5).unwrap();
    let mut merged = split.train.class_distribution();
    for part in [&split.val, &split.test] {
        for (k, v) in part.class_distribution() {
            *merged.entry(k).or_insert(0) += v;
        }
    }
    assert_eq!(merged, ds.class_distribution());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_is_a_stratified_partition(counts in prop::collection::vec(3usize..60, 1..6), seed in any::<u64>()) {
        let ds = tagged(&counts);
        let s = stratified_split(&ds, DEFAULT_RATIOS, seed).unwrap();
        let parts = [ids(&s.train), ids(&s.val), ids(&s.test)];
        let mut seen = BTreeSet::new();
        for p in &parts {
            for id in p {
                prop_assert!(seen.insert(*id), "record {} in two partitions", id);
            }
        }
        prop_assert_eq!(seen.len(), ds.len());
        for (class, &n) in counts.iter().enumerate() {
            for (part, ratio) in [&s.train, &s.val, &s.test].iter().zip(DEFAULT_RATIOS) {
                let got = part.class_distribution().get(&class).copied().unwrap_or(0) as f64;
                prop_assert!((got - ratio * n as f64).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn batches_cover_each_index_once(len in 0usize..300, bs in 1usize..50, seed in any::<u64>()) {
        let b = batches(len, bs, Some(seed));
        prop_assert_eq!(b.len(), len.div_ceil(bs));
        prop_assert!(b.iter().rev().skip(1).all(|x| x.len() == bs));
        let mut all: Vec<usize> = b.into_iter().flatten().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
    }
}
