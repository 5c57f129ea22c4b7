use crate::data::Dataset;
use crate::error::{EcgError, Result};
use crate::kernel::{argmax, softmax, Signal};
use crate::model::Model;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub samples_per_second: f64,
    pub batch_size: usize,
    pub repeats: usize,
    /// Summed wall time of the timed repeats.
    pub wall_seconds: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
    pub achieved_rate: f64,
    pub target_rate: f64,
    pub beats: usize,
}

fn classify_batch(model: &Model, batch: &[Signal], out: &mut Vec<usize>) -> Result<()> {
    for x in batch {
        let probs = softmax(&model.forward_sample(x)?);
        out.push(argmax(&probs));
    }
    Ok(())
}

/// Times `repeats` full passes over `test_set` after one untimed warm-up
/// pass. Returns the report and the predictions of the last pass.
pub fn bench_throughput(
    model: &Model,
    test_set: &Dataset,
    batch_size: usize,
    repeats: usize,
) -> Result<(ThroughputReport, Vec<usize>)> {
    if repeats < 3 {
        return Err(EcgError::InvalidArgument(format!(
            "throughput bench needs at least 3 repeats, got {repeats}"
        )));
    }
    if batch_size == 0 {
        return Err(EcgError::InvalidArgument("batch size must be at least 1".into()));
    }
    let signals = test_set.signals();
    let mut predictions = Vec::with_capacity(signals.len());
    for batch in signals.chunks(batch_size) {
        classify_batch(model, batch, &mut predictions)?;
    }
    let mut wall = Duration::ZERO;
    for _ in 0..repeats {
        predictions.clear();
        for batch in signals.chunks(batch_size) {
            let t = Instant::now();
            classify_batch(model, batch, &mut predictions)?;
            wall += t.elapsed();
        }
    }
    let secs = wall.as_secs_f64().max(f64::MIN_POSITIVE);
    let total = signals.len() * repeats;
    Ok((
        ThroughputReport {
            samples_per_second: total as f64 / secs,
            batch_size,
            repeats,
            wall_seconds: secs,
            samples: total,
        },
        predictions,
    ))
}

/// Nearest-rank percentile of an ascending-sorted slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Releases beats on a fixed `rate_per_second` schedule to a single worker.
/// Latency is completion time minus scheduled release, so a worker slower
/// than the rate accumulates queueing delay; no beat is dropped.
pub fn replay_stream(model: &Model, beats: &[Signal], rate_per_second: f64) -> Result<LatencyReport> {
    if !(rate_per_second > 0.0 && rate_per_second.is_finite()) {
        return Err(EcgError::InvalidArgument(format!(
            "replay rate must be positive, got {rate_per_second}"
        )));
    }
    if beats.is_empty() {
        return Err(EcgError::Data("no beats to replay".into()));
    }
    let interval = Duration::from_secs_f64(1.0 / rate_per_second);
    let mut latencies = Vec::with_capacity(beats.len());
    let start = Instant::now();
    for (i, x) in beats.iter().enumerate() {
        let release = start + interval * i as u32;
        let now = Instant::now();
        if release > now {
            std::thread::sleep(release - now);
        }
        let probs = softmax(&model.forward_sample(x)?);
        std::hint::black_box(argmax(&probs));
        latencies.push(release.elapsed().as_secs_f64() * 1e3);
    }
    // the last beat cannot be released before (n - 1) intervals, and the
    // stream lasts at least n intervals by definition of the rate
    let elapsed = start.elapsed().max(interval * beats.len() as u32);
    latencies.sort_by(f64::total_cmp);
    Ok(LatencyReport {
        p50_ms: percentile(&latencies, 50.0),
        p95_ms: percentile(&latencies, 95.0),
        p99_ms: percentile(&latencies, 99.0),
        max_ms: *latencies.last().expect("non-empty"),
        achieved_rate: beats.len() as f64 / elapsed.as_secs_f64(),
        target_rate: rate_per_second,
        beats: beats.len(),
    })
}
