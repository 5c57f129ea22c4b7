use super::tensor::{ParamTensor, Signal};
use crate::error::{EcgError, Result};

fn check_conv(input: &Signal, weights: &ParamTensor, bias: &ParamTensor) -> Result<(usize, usize)> {
    let [out_ch, in_ch, k] = weights.shape[..] else {
        return Err(EcgError::Shape(format!(
            "conv1d weights must be 3-D, got {:?}",
            weights.shape
        )));
    };
    if in_ch != input.channels() {
        return Err(EcgError::Shape(format!(
            "conv1d expects {in_ch} input channels, got {}",
            input.channels()
        )));
    }
    if k % 2 == 0 {
        return Err(EcgError::Shape(format!("conv1d kernel must be odd, got {k}")));
    }
    if bias.shape != [out_ch] {
        return Err(EcgError::Shape(format!(
            "conv1d bias must have shape [{out_ch}], got {:?}",
            bias.shape
        )));
    }
    Ok((out_ch, k))
}

/// Valid output range `[lo, hi)` for kernel tap `j` with same-padding `pad`:
/// the positions `t` where `t + j - pad` lies inside the input. `None` when
/// the tap never overlaps the signal.
#[inline]
fn tap_range(j: usize, pad: usize, len: usize) -> Option<(usize, usize)> {
    let lo = pad.saturating_sub(j);
    let hi = (len + pad).saturating_sub(j).min(len);
    (lo < hi).then_some((lo, hi))
}

/// Stride-1 cross-correlation with zero same-padding.
///
/// `weights` has shape `[out_ch, in_ch, k]` with `k` odd; output length
/// equals input length.
pub fn conv1d(input: &Signal, weights: &ParamTensor, bias: &ParamTensor) -> Result<Signal> {
    let (out_ch, k) = check_conv(input, weights, bias)?;
    input.ensure_finite("conv1d")?;
    let in_ch = input.channels();
    let len = input.length();
    let pad = k / 2;
    if in_ch * k > 2 * len {
        return Ok(conv1d_columns(input, weights, bias, out_ch, k));
    }
    let mut out = Signal::zeros(out_ch, len);
    for o in 0..out_ch {
        let row = out.channel_mut(o);
        row.iter_mut().for_each(|v| *v = bias.values[o]);
        for i in 0..in_ch {
            let x = input.channel(i);
            let w = &weights.values[(o * in_ch + i) * k..(o * in_ch + i + 1) * k];
            for (j, &wj) in w.iter().enumerate() {
                let Some((lo, hi)) = tap_range(j, pad, len) else {
                    continue;
                };
                let src = &x[lo + j - pad..hi + j - pad];
                for (y, &xv) in row[lo..hi].iter_mut().zip(src) {
                    *y += wj * xv;
                }
            }
        }
    }
    Ok(out)
}

/// Same result as the tap loop, laid out as one dot product of length
/// `in_ch * k` per output sample. Faster when the signal is short compared
/// with the number of input taps, as in the deeper blocks.
fn conv1d_columns(input: &Signal, weights: &ParamTensor, bias: &ParamTensor, out_ch: usize, k: usize) -> Signal {
    let in_ch = input.channels();
    let len = input.length();
    let width = in_ch * k;
    let cols = columns(input, k);
    let mut out = Signal::zeros(out_ch, len);
    for o in 0..out_ch {
        let w = &weights.values[o * width..(o + 1) * width];
        let row = out.channel_mut(o);
        for (t, y) in row.iter_mut().enumerate() {
            let col = &cols[t * width..(t + 1) * width];
            *y = bias.values[o] + dot(w, col);
        }
    }
    out
}

/// Row `t` holds every input sample that output position `t` sees, laid out
/// like one filter of the weight tensor (`[in_ch][k]`), zeros for padding.
fn columns(input: &Signal, k: usize) -> Vec<f32> {
    let in_ch = input.channels();
    let len = input.length();
    let pad = k / 2;
    let width = in_ch * k;
    let mut cols = vec![0.0f32; len * width];
    for t in 0..len {
        let col = &mut cols[t * width..(t + 1) * width];
        for i in 0..in_ch {
            let x = input.channel(i);
            for j in 0..k {
                if let Some(src) = (t + j).checked_sub(pad).filter(|&s| s < len) {
                    col[i * k + j] = x[src];
                }
            }
        }
    }
    cols
}

/// Eight independent partial sums so the loop vectorises; the summation
/// order is fixed, so results stay deterministic.
#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f32 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f32>() + tail
}

/// Accumulates weight and bias gradients into `weights.grad` / `bias.grad`
/// and returns the gradient with respect to `input`.
pub fn conv1d_backward(
    input: &Signal,
    weights: &mut ParamTensor,
    bias: &mut ParamTensor,
    grad_out: &Signal,
) -> Result<Signal> {
    let (out_ch, k) = check_conv(input, weights, bias)?;
    let in_ch = input.channels();
    let len = input.length();
    if grad_out.channels() != out_ch || grad_out.length() != len {
        return Err(EcgError::Shape(format!(
            "conv1d grad must be {out_ch}x{len}, got {}x{}",
            grad_out.channels(),
            grad_out.length()
        )));
    }
    if in_ch * k > 2 * len {
        return Ok(conv1d_columns_backward(input, weights, bias, grad_out, out_ch, k));
    }
    let pad = k / 2;
    let mut grad_in = Signal::zeros(in_ch, len);
    for o in 0..out_ch {
        let gy = grad_out.channel(o);
        bias.grad[o] += gy.iter().sum::<f32>();
        for i in 0..in_ch {
            let x = input.channel(i);
            let base = (o * in_ch + i) * k;
            let gx = grad_in.channel_mut(i);
            for j in 0..k {
                let Some((lo, hi)) = tap_range(j, pad, len) else {
                    continue;
                };
                let shift = j as isize - pad as isize;
                let xs = &x[(lo as isize + shift) as usize..(hi as isize + shift) as usize];
                let mut acc = 0.0f32;
                for (&g, &xv) in gy[lo..hi].iter().zip(xs) {
                    acc += g * xv;
                }
                weights.grad[base + j] += acc;
                let wj = weights.values[base + j];
                let gxs = &mut gx[(lo as isize + shift) as usize..(hi as isize + shift) as usize];
                for (d, &g) in gxs.iter_mut().zip(&gy[lo..hi]) {
                    *d += wj * g;
                }
            }
        }
    }
    Ok(grad_in)
}

fn conv1d_columns_backward(
    input: &Signal,
    weights: &mut ParamTensor,
    bias: &mut ParamTensor,
    grad_out: &Signal,
    out_ch: usize,
    k: usize,
) -> Signal {
    let in_ch = input.channels();
    let len = input.length();
    let pad = k / 2;
    let width = in_ch * k;
    let cols = columns(input, k);
    let mut grad_cols = vec![0.0f32; len * width];
    for o in 0..out_ch {
        let gy = grad_out.channel(o);
        bias.grad[o] += gy.iter().sum::<f32>();
        let w = &weights.values[o * width..(o + 1) * width];
        let gw = &mut weights.grad[o * width..(o + 1) * width];
        for (t, &g) in gy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let col = &cols[t * width..(t + 1) * width];
            for (d, &c) in gw.iter_mut().zip(col) {
                *d += g * c;
            }
            let gcol = &mut grad_cols[t * width..(t + 1) * width];
            for (d, &wv) in gcol.iter_mut().zip(w) {
                *d += g * wv;
            }
        }
    }
    let mut grad_in = Signal::zeros(in_ch, len);
    for t in 0..len {
        let gcol = &grad_cols[t * width..(t + 1) * width];
        for i in 0..in_ch {
            let gx = grad_in.channel_mut(i);
            for j in 0..k {
                if let Some(src) = (t + j).checked_sub(pad).filter(|&s| s < len) {
                    gx[src] += gcol[i * k + j];
                }
            }
        }
    }
    grad_in
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(shape: Vec<usize>, values: Vec<f32>) -> ParamTensor {
        ParamTensor::new(shape, values).unwrap()
    }

    #[test]
    fn identity_kernel() {
        let x = Signal::mono(vec![1.0, 2.0, 3.0]).unwrap();
        let y = conv1d(&x, &param(vec![1, 1, 1], vec![1.0]), &param(vec![1], vec![0.0])).unwrap();
        assert_eq!(y.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn bias_only() {
        let x = Signal::mono(vec![0.3, -7.0, 2.0, 9.0]).unwrap();
        let y = conv1d(&x, &ParamTensor::zeros(vec![1, 1, 3]), &param(vec![1], vec![0.5])).unwrap();
        assert_eq!(y.values(), &[0.5; 4]);
    }

    #[test]
    fn difference_kernel_with_zero_padding() {
        // out[t] = x[t-1] - x[t+1]
        let x = Signal::mono(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = conv1d(&x, &param(vec![1, 1, 3], vec![1.0, 0.0, -1.0]), &param(vec![1], vec![0.0]))
            .unwrap();
        assert_eq!(y.values(), &[-2.0, -2.0, -2.0, 3.0]);
    }

    #[test]
    fn kernel_longer_than_signal() {
        let x = Signal::mono(vec![2.0]).unwrap();
        let y = conv1d(
            &x,
            &param(vec![1, 1, 5], vec![1.0, 1.0, 3.0, 1.0, 1.0]),
            &param(vec![1], vec![0.0]),
        )
        .unwrap();
        assert_eq!(y.values(), &[6.0]);
    }

    #[test]
    fn channel_mismatch_is_shape_error() {
        let x = Signal::new(2, 3, vec![0.0; 6]).unwrap();
        let err = conv1d(&x, &ParamTensor::zeros(vec![1, 1, 3]), &ParamTensor::zeros(vec![1]));
        assert!(matches!(err, Err(EcgError::Shape(_))));
    }

    #[test]
    fn non_finite_input_is_numeric_error() {
        let x = Signal::mono(vec![0.0, f32::NAN, 1.0]).unwrap();
        let err = conv1d(&x, &ParamTensor::zeros(vec![1, 1, 3]), &ParamTensor::zeros(vec![1]));
        assert!(matches!(err, Err(EcgError::Numeric(_))));
    }

    #[test]
    fn backward_of_difference_kernel() {
        let x = Signal::mono(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut w = param(vec![1, 1, 3], vec![1.0, 0.0, -1.0]);
        let mut b = ParamTensor::zeros(vec![1]);
        let g = Signal::mono(vec![1.0; 4]).unwrap();
        let gx = conv1d_backward(&x, &mut w, &mut b, &g).unwrap();
        // dL/dx[s] = sum_t g[t] * w[s - t + 1]
        assert_eq!(gx.values(), &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(b.grad, vec![4.0]);
        // dL/dw[j] = sum_t x[t + j - 1]
        assert_eq!(w.grad, vec![6.0, 10.0, 9.0]);
    }
}
