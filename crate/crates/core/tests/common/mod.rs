//! Test-only oracles: naive f64 re-implementations of every layer and of the
//! whole network forward pass, plus finite-difference helpers. Nothing here
//! calls into the crate's kernels.

#![allow(dead_code, clippy::needless_range_loop)]

use ecgnet::model::{LayerSpec, Model};
use ecgnet::ParamTensor;
use rand::{Rng, SeedableRng};

pub type Rng64 = rand::rngs::StdRng;

pub fn rng(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut Rng64, n: usize, scale: f32) -> Vec<f32> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Channel-major 2-D buffer in f64.
pub type Planes = Vec<Vec<f64>>;

pub fn planes(channels: usize, length: usize, values: &[f32]) -> Planes {
    (0..channels)
        .map(|c| values[c * length..(c + 1) * length].iter().map(|&v| f64::from(v)).collect())
        .collect()
}

pub fn widen(values: &[f32]) -> Vec<f64> {
    values.iter().map(|&v| f64::from(v)).collect()
}

/// Triple-loop zero-padded cross-correlation; `w` is `[out][in][k]` flat.
pub fn conv_ref(x: &Planes, w: &[f64], b: &[f64], out_ch: usize, k: usize) -> Planes {
    let in_ch = x.len();
    let len = x[0].len();
    let pad = (k / 2) as isize;
    let mut y = vec![vec![0.0; len]; out_ch];
    for o in 0..out_ch {
        for t in 0..len {
            let mut acc = b[o];
            for i in 0..in_ch {
                for j in 0..k {
                    let s = t as isize + j as isize - pad;
                    if s >= 0 && (s as usize) < len {
                        acc += w[(o * in_ch + i) * k + j] * x[i][s as usize];
                    }
                }
            }
            y[o][t] = acc;
        }
    }
    y
}

pub fn relu_ref(x: &Planes, pattern: &mut Vec<bool>) -> Planes {
    x.iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    pattern.push(v > 0.0);
                    v.max(0.0)
                })
                .collect()
        })
        .collect()
}

/// 2/2 max pool with first-index tie break; records the winning offsets.
pub fn pool_ref(x: &Planes, window: usize, stride: usize, pattern: &mut Vec<usize>) -> Planes {
    x.iter()
        .map(|row| {
            let n = (row.len() - window) / stride + 1;
            (0..n)
                .map(|t| {
                    let win = &row[t * stride..t * stride + window];
                    let mut best = 0;
                    for (i, &v) in win.iter().enumerate() {
                        if v > win[best] {
                            best = i;
                        }
                    }
                    pattern.push(best);
                    win[best]
                })
                .collect()
        })
        .collect()
}

pub fn dense_ref(x: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(r, &bias)| bias + (0..n).map(|c| w[r * n + c] * x[c]).sum::<f64>())
        .collect()
}

pub fn cross_entropy_ref(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Activation pattern of a forward pass (relu signs and pool winners); a
/// finite difference is only meaningful when it does not change.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Pattern {
    pub relu: Vec<bool>,
    pub pool: Vec<usize>,
}

/// Whole-network forward in f64 using the model's layer list and tensors.
/// Tensors are consumed in the same order the layers declare them.
pub fn network_ref(model: &Model, params: &[Vec<f64>], input: &[f64]) -> (Vec<f64>, Pattern) {
    let mut pat = Pattern::default();
    let mut x: Planes = vec![input.to_vec()];
    let mut flat: Option<Vec<f64>> = None;
    let mut next = 0usize;
    let mut take = || {
        next += 2;
        next - 2
    };
    for layer in &model.spec().layers {
        match *layer {
            LayerSpec::Conv { filters, kernel } => {
                let s = take();
                x = conv_ref(&x, &params[s], &params[s + 1], filters, kernel);
            }
            LayerSpec::Relu => match flat.as_mut() {
                Some(v) => {
                    let p = relu_ref(&vec![v.clone()], &mut pat.relu);
                    *v = p.into_iter().next().unwrap();
                }
                None => x = relu_ref(&x, &mut pat.relu),
            },
            LayerSpec::Maxpool { window, stride } => x = pool_ref(&x, window, stride, &mut pat.pool),
            LayerSpec::ResidualBlock { filters, kernel } => {
                let c1 = take();
                let c2 = take();
                let h = relu_ref(&conv_ref(&x, &params[c1], &params[c1 + 1], filters, kernel), &mut pat.relu);
                let mut sum = conv_ref(&h, &params[c2], &params[c2 + 1], filters, kernel);
                let skip = if x.len() != filters {
                    let s = take();
                    conv_ref(&x, &params[s], &params[s + 1], filters, 1)
                } else {
                    x.clone()
                };
                for (a, b) in sum.iter_mut().zip(&skip) {
                    for (u, v) in a.iter_mut().zip(b) {
                        *u += v;
                    }
                }
                x = pool_ref(&relu_ref(&sum, &mut pat.relu), 2, 2, &mut pat.pool);
            }
            LayerSpec::Flatten => flat = Some(x.iter().flatten().copied().collect()),
            LayerSpec::Dense { .. } => {
                let s = take();
                let v = flat.as_ref().expect("dense after flatten");
                flat = Some(dense_ref(v, &params[s], &params[s + 1]));
            }
        }
    }
    (flat.expect("network ends in dense"), pat)
}

pub fn widened_params(model: &Model) -> Vec<Vec<f64>> {
    model.params().iter().map(|p| widen(&p.values)).collect()
}

/// `|a - n| / max(|a|, |n|, floor)`; the floor keeps vanishing gradients
/// from turning rounding noise into large ratios.
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

pub const FD_STEP: f64 = 1e-3;
pub const GRAD_REL_TOL: f64 = 1e-2;
pub const GRAD_FLOOR: f64 = 1e-3;

#[derive(Debug, Default)]
pub struct GradCheck {
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_rel: f64,
    pub worst: String,
}

/// Central differences of the f64 reference loss against the analytic
/// gradient in `model`, on `per_tensor` random coordinates of every tensor.
/// Coordinates whose perturbation flips the activation pattern are skipped.
pub fn check_network_grads(
    model: &Model,
    input: &[f64],
    label: usize,
    per_tensor: usize,
    rng: &mut Rng64,
) -> GradCheck {
    let base = widened_params(model);
    let (_, pattern) = network_ref(model, &base, input);
    let mut out = GradCheck::default();
    for (t, (name, tensor)) in model.tensors().enumerate() {
        for _ in 0..per_tensor.min(tensor.len()) {
            let i = rng.gen_range(0..tensor.len());
            let mut p = base.clone();
            p[t][i] = base[t][i] + FD_STEP;
            let (lp, pat_p) = network_ref(model, &p, input);
            p[t][i] = base[t][i] - FD_STEP;
            let (lm, pat_m) = network_ref(model, &p, input);
            if pat_p != pattern || pat_m != pattern {
                out.skipped_kinks += 1;
                continue;
            }
            let numeric = (cross_entropy_ref(&lp, label) - cross_entropy_ref(&lm, label)) / (2.0 * FD_STEP);
            let analytic = f64::from(tensor.grad[i]);
            let e = rel_err(analytic, numeric, GRAD_FLOOR);
            out.checked += 1;
            if e > out.max_rel {
                out.max_rel = e;
                out.worst = format!("{name}[{i}]: analytic {analytic:e} numeric {numeric:e}");
            }
        }
    }
    out
}

pub fn param(shape: Vec<usize>, values: Vec<f32>) -> ParamTensor {
    ParamTensor::new(shape, values).unwrap()
}

/// Early stopping written as a whole-sequence scan: stop at the first epoch
/// that is `patience` epochs past the last strict improvement.
/// Returns (1-based stop epoch, 1-based best epoch).
pub fn simulate_early_stop(metrics: &[f64], patience: usize, min_delta: f64) -> (Option<usize>, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut last_improve = 0usize;
    for (i, &m) in metrics.iter().enumerate() {
        let epoch = i + 1;
        if epoch == 1 || m > best + min_delta {
            best = m;
            last_improve = epoch;
        } else if epoch - last_improve == patience {
            return (Some(epoch), last_improve);
        }
    }
    (None, last_improve)
}

/// Reduce-on-plateau as "epochs since the later of the last improvement and
/// the last reduction". Returns the learning rate after each epoch.
pub fn simulate_plateau(metrics: &[f64], lr0: f64, patience: usize, factor: f64, min_lr: f64) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut anchor = 0usize;
    let mut lr = lr0.max(min_lr);
    let mut out = Vec::with_capacity(metrics.len());
    for (i, &m) in metrics.iter().enumerate() {
        let epoch = i + 1;
        if epoch == 1 || m > best {
            best = m;
            anchor = epoch;
        } else if epoch - anchor == patience {
            lr = f64::max(lr * factor, min_lr);
            anchor = epoch;
        }
        out.push(lr);
    }
    out
}

/// Random validation-accuracy-like sequence with frequent plateaus and ties.
pub fn random_metric_sequence(rng: &mut Rng64, len: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(len);
    let mut cur: f64 = rng.gen_range(0.3..0.9);
    for _ in 0..len {
        match rng.gen_range(0..4) {
            0 => {}
            1 => cur += rng.gen_range(0.0..0.02),
            2 => cur -= rng.gen_range(0.0..0.02),
            _ => cur = (cur * 100.0).round() / 100.0,
        }
        v.push(cur);
    }
    v
}
