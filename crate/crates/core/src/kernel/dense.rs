use super::tensor::ParamTensor;
use crate::error::{EcgError, Result};

fn check_dense(n_in: usize, weights: &ParamTensor, bias: &ParamTensor) -> Result<usize> {
    let [m, n] = weights.shape[..] else {
        return Err(EcgError::Shape(format!(
            "dense weights must be 2-D, got {:?}",
            weights.shape
        )));
    };
    if n != n_in {
        return Err(EcgError::Shape(format!(
            "dense expects {n} inputs, got {n_in}"
        )));
    }
    if bias.shape != [m] {
        return Err(EcgError::Shape(format!(
            "dense bias must have shape [{m}], got {:?}",
            bias.shape
        )));
    }
    Ok(m)
}

/// `W x + b` with `W` stored row-major as `[m, n]`.
pub fn dense(input: &[f32], weights: &ParamTensor, bias: &ParamTensor) -> Result<Vec<f32>> {
    let m = check_dense(input.len(), weights, bias)?;
    let n = input.len();
    Ok((0..m)
        .map(|r| {
            let row = &weights.values[r * n..(r + 1) * n];
            bias.values[r] + row.iter().zip(input).map(|(w, x)| w * x).sum::<f32>()
        })
        .collect())
}

/// Accumulates `dW = g x^T`, `db = g` and returns `W^T g`.
pub fn dense_backward(
    input: &[f32],
    weights: &mut ParamTensor,
    bias: &mut ParamTensor,
    grad_out: &[f32],
) -> Result<Vec<f32>> {
    let m = check_dense(input.len(), weights, bias)?;
    if grad_out.len() != m {
        return Err(EcgError::Shape(format!(
            "dense grad has {} entries, expected {m}",
            grad_out.len()
        )));
    }
    let n = input.len();
    let mut grad_in = vec![0.0f32; n];
    for (r, &g) in grad_out.iter().enumerate() {
        bias.grad[r] += g;
        if g == 0.0 {
            continue;
        }
        let row = &weights.values[r * n..(r + 1) * n];
        let grow = &mut weights.grad[r * n..(r + 1) * n];
        for ((dw, gx), (&w, &x)) in grow.iter_mut().zip(grad_in.iter_mut()).zip(row.iter().zip(input)) {
            *dw += g * x;
            *gx += g * w;
        }
    }
    Ok(grad_in)
}
