use super::tensor::Signal;
use crate::error::{EcgError, Result};

pub fn relu(input: &Signal) -> Signal {
    let mut out = input.clone();
    out.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

/// Passes the gradient where `input > 0`; the subgradient at zero is zero.
pub fn relu_backward(input: &Signal, grad_out: &Signal) -> Result<Signal> {
    if input.values().len() != grad_out.values().len() {
        return Err(EcgError::Shape("relu grad does not match input".into()));
    }
    let mut grad_in = grad_out.clone();
    for (g, &x) in grad_in.values_mut().iter_mut().zip(input.values()) {
        if x <= 0.0 {
            *g = 0.0;
        }
    }
    Ok(grad_in)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_negatives() {
        let x = Signal::mono(vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).values(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn all_negative_kills_gradient() {
        let x = Signal::mono(vec![-1.0, -0.5, -3.0]).unwrap();
        assert_eq!(relu(&x).values(), &[0.0; 3]);
        let g = relu_backward(&x, &Signal::mono(vec![1.0; 3]).unwrap()).unwrap();
        assert_eq!(g.values(), &[0.0; 3]);
    }

    #[test]
    fn identity_on_non_negative() {
        let x = Signal::mono(vec![0.0, 0.25, 8.0]).unwrap();
        assert_eq!(relu(&x), x);
    }

    #[test]
    fn zero_has_zero_subgradient() {
        let x = Signal::mono(vec![0.0, 1.0]).unwrap();
        let g = relu_backward(&x, &Signal::mono(vec![2.0, 2.0]).unwrap()).unwrap();
        assert_eq!(g.values(), &[0.0, 2.0]);
    }
}
