use super::Dataset;
use crate::error::{EcgError, Result};
use crate::rng;
use rand::seq::SliceRandom;

pub const DEFAULT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Partition sizes for `n` items by largest remainder. Ties in the
/// fractional part go to the earlier partition.
pub(crate) fn largest_remainder(n: usize, ratios: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    // equal remainders favour the later partition, so held-out sets round up
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).expect("finite ratios").then(b.cmp(&a))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Per-class shuffle then partition into train/val/test by `ratios`.
///
/// Classes are processed in ascending label order from one generator seeded
/// with `seed`; each partition is then shuffled so classes interleave.
pub fn stratified_split(dataset: &Dataset, ratios: [f64; 3], seed: u64) -> Result<Split> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(EcgError::InvalidArgument(format!(
            "split ratios {ratios:?} must be non-negative and sum to 1"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.n_classes()];
    for (i, r) in dataset.records().iter().enumerate() {
        by_class[r.label].push(i);
    }
    let mut rng = rng::seeded(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (label, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 3 {
            return Err(EcgError::Data(format!(
                "class {label} has {} records, need at least 3 to split",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let counts = largest_remainder(members.len(), &ratios);
        let mut rest = members.as_slice();
        for (part, count) in parts.iter_mut().zip(counts) {
            let (take, tail) = rest.split_at(count);
            part.extend_from_slice(take);
            rest = tail;
        }
    }
    for part in parts.iter_mut() {
        part.shuffle(&mut rng);
    }
    let [train, val, test] = parts;
    Ok(Split {
        train: dataset.subset(&train)?,
        val: dataset.subset(&val)?,
        test: dataset.subset(&test)?,
    })
}

/// Record indices grouped into batches for one epoch. Every index appears
/// exactly once; the last batch may be short.
pub fn batches(len: usize, batch_size: usize, shuffle_seed: Option<u64>) -> Vec<Vec<usize>> {
    let batch_size = batch_size.max(1);
    let mut order: Vec<usize> = (0..len).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut rng::seeded(seed));
    }
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}
