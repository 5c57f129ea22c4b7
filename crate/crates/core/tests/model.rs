mod common;

use common::*;
use ecgnet::data::synth;
use ecgnet::model::{
    build_modified, build_original, load_checkpoint, save_checkpoint, LayerSpec, ModelSpec, Shape,
};
use ecgnet::{EcgError, Signal};
use proptest::prelude::*;

fn beats(n: usize, len: usize, seed: u64) -> Vec<Signal> {
    synth::ptb_like(n, len, seed).signals()
}

#[test]
fn batch_forward_equals_per_sample() {
    let model = build_modified(187, 5, 1).unwrap();
    let xs = beats(6, 187, 2);
    let batch = model.forward(&xs).unwrap();
    for (row, x) in batch.iter().zip(&xs) {
        assert_eq!(row, &model.forward_sample(x).unwrap());
    }
    assert_eq!(model.forward(&xs[..1]).unwrap()[0], batch[0]);
}

#[test]
fn logit_widths() {
    let x = beats(1, 187, 3);
    assert_eq!(build_modified(187, 5, 0).unwrap().forward(&x).unwrap()[0].len(), 5);
    assert_eq!(build_modified(187, 2, 0).unwrap().forward(&x).unwrap()[0].len(), 2);
    assert_eq!(build_original(187, 5, 0).unwrap().forward(&x).unwrap()[0].len(), 5);
}

#[test]
fn same_seed_same_weights_and_logits() {
    let x = beats(2, 187, 4);
    let a = build_modified(187, 5, 9).unwrap();
    let b = build_modified(187, 5, 9).unwrap();
    assert_eq!(a.params(), b.params());
    assert_eq!(a.forward(&x).unwrap(), b.forward(&x).unwrap());
    assert_ne!(a.params(), build_modified(187, 5, 10).unwrap().params());
}

#[test]
fn wrong_input_length_is_shape_error() {
    let model = build_modified(187, 5, 0).unwrap();
    let x = Signal::mono(vec![0.0; 100]).unwrap();
    assert!(matches!(model.forward_sample(&x), Err(EcgError::Shape(_))));
}

fn balanced_batch() -> (Vec<Signal>, Vec<usize>) {
    let ds = synth::ptb_like(200, 187, 5);
    let mut xs = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2 {
        for r in ds.records().iter().filter(|r| r.label == class).take(16) {
            xs.push(r.signal());
            labels.push(class);
        }
    }
    (xs, labels)
}

#[test]
fn untrained_batch_loss_matches_reference() {
    let (xs, labels) = balanced_batch();
    let mut model = build_modified(187, 2, 42).unwrap();
    let params = widened_params(&model);
    let want: f64 = xs
        .iter()
        .zip(&labels)
        .map(|(x, &l)| cross_entropy_ref(&network_ref(&model, &params, &widen(x.values())).0, l))
        .sum::<f64>()
        / xs.len() as f64;
    let loss = model.backward(&xs, &labels).unwrap();
    assert!((f64::from(loss) - want).abs() < 1e-4, "loss {loss} vs {want}");
    assert!(loss > 0.0 && loss.is_finite());
    assert_eq!(model.backward(&xs, &labels).unwrap(), loss);
}

/// He-uniform init plus identity shortcuts lets activation variance grow
/// through the blocks, so untrained logits are not near zero. Seeds 0..20
/// give losses between 0.71 and 1.91.
#[test]
#[ignore = "does not hold under He-uniform init: seed 42 gives 0.90"]
fn untrained_binary_loss_near_ln2() {
    let (xs, labels) = balanced_batch();
    let mut model = build_modified(187, 2, 42).unwrap();
    let loss = model.backward(&xs, &labels).unwrap();
    assert!((f64::from(loss) - std::f64::consts::LN_2).abs() < 0.2, "loss {loss}");
}

#[test]
fn backward_label_out_of_range() {
    let mut model = build_modified(32, 2, 0).unwrap();
    let xs = beats(1, 32, 0);
    assert!(matches!(model.backward(&xs, &[2]), Err(EcgError::Data(_))));
}

#[test]
fn backward_populates_every_tensor() {
    let mut model = build_modified(32, 5, 3).unwrap();
    let xs = beats(4, 32, 1);
    model.backward(&xs, &[0, 1, 1, 0]).unwrap();
    for (name, p) in model.tensors() {
        assert!(p.grad.iter().any(|g| *g != 0.0), "{name} has no gradient");
    }
}

#[test]
fn full_network_gradient_check() {
    for seed in 0..3 {
        let mut model = build_modified(32, 5, seed).unwrap();
        let x = &beats(1, 32, seed)[0];
        let label = (seed % 5) as usize;
        model.backward(std::slice::from_ref(x), &[label]).unwrap();
        let mut r = rng(seed);
        let report = check_network_grads(&model, &widen(x.values()), label, 6, &mut r);
        assert!(report.max_rel < GRAD_REL_TOL, "seed {seed}: {report:?}");
        assert!(report.checked > 50);
    }
}

#[test]
fn replace_head_keeps_features() {
    let mut model = build_modified(187, 5, 7).unwrap();
    let before = model.clone();
    model
        .replace_head(vec!["Normal".into(), "Abnormal".into()], 1)
        .unwrap();
    let n = model.params().len();
    for (i, ((name, a), (_, b))) in before.tensors().zip(model.tensors()).enumerate() {
        if i < n - 2 {
            let a: Vec<u32> = a.values.iter().map(|v| v.to_bits()).collect();
            let b: Vec<u32> = b.values.iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b, "{name} changed");
        } else {
            assert_ne!(a.shape, b.shape);
        }
    }
    assert_eq!(model.params()[n - 2].shape, vec![2, 32]);
    let delta = model.parameter_count() as i64 - before.parameter_count() as i64;
    assert_eq!(delta, (32 + 1) * (2 - 5));
    assert_eq!(model.label_names(), ["Normal", "Abnormal"]);
    assert_eq!(model.n_classes(), 2);
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ecgm");
    let model = build_original(187, 5, 3).unwrap();
    save_checkpoint(&model, &path).unwrap();
    let loaded = load_checkpoint(&path).unwrap();
    assert_eq!(loaded.spec(), model.spec());
    let x = beats(3, 187, 8);
    assert_eq!(loaded.forward(&x).unwrap(), model.forward(&x).unwrap());
    save_checkpoint(&loaded, dir.path().join("again.ecgm")).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(dir.path().join("again.ecgm")).unwrap()
    );
}

#[test]
fn missing_checkpoint_is_checkpoint_error() {
    assert!(matches!(
        load_checkpoint("/nonexistent/m.ecgm"),
        Err(EcgError::Checkpoint(_))
    ));
}

fn counted_by_walking(spec: &ModelSpec) -> usize {
    let mut n = 0;
    for layer in &spec.layers {
        match layer {
            LayerSpec::Conv { .. } => n += 1,
            LayerSpec::ResidualBlock { .. } => n += 2,
            _ => {}
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shapes_are_sound(len in 64usize..400, classes in 2usize..6) {
        for model in [build_original(len, classes, 0).unwrap(), build_modified(len, classes, 0).unwrap()] {
            let spec = model.spec();
            let shapes = spec.shapes().unwrap();
            let flatten_at = spec.layers.iter().position(|l| *l == LayerSpec::Flatten).unwrap();
            let Shape::Signal { channels, length } = shapes[flatten_at - 1] else { panic!() };
            prop_assert_eq!(spec.flatten_size().unwrap(), channels * length);
            prop_assert_eq!(channels, *spec.block_filters().last().unwrap());
            prop_assert_eq!(*shapes.last().unwrap(), Shape::Vector(classes));
            let want = if spec.name == ecgnet::Arch::Original { 11 } else { 6 };
            prop_assert_eq!(counted_by_walking(spec), want);
            let x = Signal::mono(vec![0.5; len]).unwrap();
            prop_assert_eq!(model.forward_sample(&x).unwrap().len(), classes);
        }
    }
}
