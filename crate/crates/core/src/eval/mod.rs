//! Evaluation: confusion matrix and per-class metrics, batch throughput and
//! fixed-rate streaming latency.

mod bench;
mod metrics;
mod report;

pub use bench::{bench_throughput, percentile, replay_stream, LatencyReport, ThroughputReport};
pub use metrics::{f1, ClassMetrics, ClassScore, ConfusionMatrix};
pub use report::{ClassReport, Report};

use crate::data::Dataset;
use crate::error::{EcgError, Result};
use crate::kernel::{argmax, Signal};
use crate::model::Model;

/// Worker count from `ECG_THREADS` (default 1).
pub fn threads_from_env() -> usize {
    std::env::var("ECG_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or(1)
}

/// Maps `f` over `items` on up to `threads` scoped workers, preserving order.
fn par_map<T: Sync, U: Send>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> Result<U> + Sync,
) -> Result<Vec<U>> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Result<Vec<U>>>()))
            .collect();
        let mut out = Vec::with_capacity(items.len());
        for h in handles {
            out.extend(h.join().expect("evaluation worker panicked")?);
        }
        Ok(out)
    })
}

/// Logits of layers `from..` for each prepared input, in input order.
pub fn logits_parallel(model: &Model, inputs: &[Signal], from: usize, threads: usize) -> Result<Vec<Vec<f32>>> {
    let end = model.spec().layers.len();
    par_map(inputs, threads, |x| {
        if from == 0 {
            model.forward_sample(x)
        } else {
            Ok(model.forward_range(x.clone(), from, end)?.into_values())
        }
    })
}

/// Flattened feature vectors (inputs to the dense head) for each signal.
pub fn features_parallel(model: &Model, inputs: &[Signal], threads: usize) -> Result<Vec<Signal>> {
    par_map(inputs, threads, |x| model.features(x))
}

/// Argmax predictions; ties go to the lowest class index.
pub fn predict(model: &Model, inputs: &[Signal], threads: usize) -> Result<Vec<usize>> {
    Ok(logits_parallel(model, inputs, 0, threads)?
        .iter()
        .map(|l| argmax(l))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub metrics: ClassMetrics,
    pub predictions: Vec<usize>,
}

pub fn evaluate(model: &Model, test_set: &Dataset) -> Result<Evaluation> {
    evaluate_with_threads(model, test_set, 1)
}

pub fn evaluate_with_threads(model: &Model, test_set: &Dataset, threads: usize) -> Result<Evaluation> {
    if test_set.is_empty() {
        return Err(EcgError::Data("test set is empty".into()));
    }
    if test_set.n_classes() != model.n_classes() {
        return Err(EcgError::Data(format!(
            "test set has {} classes, model has {}",
            test_set.n_classes(),
            model.n_classes()
        )));
    }
    let predictions = predict(model, &test_set.signals(), threads)?;
    let confusion = ConfusionMatrix::from_pairs(model.n_classes(), &test_set.label_vec(), &predictions);
    Ok(Evaluation {
        metrics: confusion.metrics(),
        confusion,
        predictions,
    })
}
