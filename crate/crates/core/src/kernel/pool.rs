use super::tensor::Signal;
use crate::error::{EcgError, Result};

/// Result of a max-pool forward pass: pooled signal plus, for every output
/// element, the flat input index it was taken from.
#[derive(Debug, Clone)]
pub struct Pooled {
    pub output: Signal,
    pub argmax: Vec<usize>,
}

/// Max pooling along positions. Incomplete trailing windows are dropped and
/// ties resolve to the first index in the window.
pub fn maxpool1d(input: &Signal, window: usize, stride: usize) -> Result<Pooled> {
    if window == 0 || stride == 0 {
        return Err(EcgError::Shape("maxpool window and stride must be positive".into()));
    }
    let len = input.length();
    if len < window {
        return Err(EcgError::Shape(format!(
            "maxpool window {window} exceeds signal length {len}"
        )));
    }
    let out_len = (len - window) / stride + 1;
    let channels = input.channels();
    let mut out = Signal::zeros(channels, out_len);
    let mut argmax = Vec::with_capacity(channels * out_len);
    for c in 0..channels {
        let x = input.channel(c);
        let row = out.channel_mut(c);
        for (t, y) in row.iter_mut().enumerate() {
            let start = t * stride;
            let mut best = start;
            for p in start + 1..start + window {
                if x[p] > x[best] {
                    best = p;
                }
            }
            *y = x[best];
            argmax.push(c * len + best);
        }
    }
    Ok(Pooled {
        output: out,
        argmax,
    })
}

/// Routes each output gradient to its recorded argmax position.
pub fn maxpool1d_backward(
    input_channels: usize,
    input_length: usize,
    argmax: &[usize],
    grad_out: &Signal,
) -> Result<Signal> {
    if grad_out.values().len() != argmax.len() {
        return Err(EcgError::Shape(format!(
            "maxpool grad has {} values but {} argmax entries",
            grad_out.values().len(),
            argmax.len()
        )));
    }
    let mut grad_in = Signal::zeros(input_channels, input_length);
    let gx = grad_in.values_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.values()) {
        gx[idx] += g;
    }
    Ok(grad_in)
}
