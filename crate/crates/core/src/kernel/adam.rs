use super::tensor::ParamTensor;
use crate::error::{EcgError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(EcgError::InvalidArgument(format!("invalid optimizer config {self:?}")))
        }
    }
}

/// One bias-corrected adaptive-moment update. Clears the gradient afterwards.
pub fn adam_step(param: &mut ParamTensor, cfg: &OptimizerConfig) -> Result<()> {
    if let Some(i) = param.grad.iter().position(|g| !g.is_finite()) {
        return Err(EcgError::Numeric(format!("non-finite gradient at index {i}")));
    }
    param.step_count += 1;
    let t = param.step_count as i32;
    let correction1 = 1.0 - f64::from(cfg.beta1).powi(t);
    let correction2 = 1.0 - f64::from(cfg.beta2).powi(t);
    // mhat / (sqrt(vhat) + eps) with mhat = m / c1, sqrt(vhat) = sqrt(v) / sqrt(c2)
    let step = (f64::from(cfg.learning_rate) / correction1) as f32;
    let sqrt_c2 = correction2.sqrt() as f32;
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    for (((w, g), m), v) in param
        .values
        .iter_mut()
        .zip(param.grad.iter_mut())
        .zip(param.m.iter_mut())
        .zip(param.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * *g;
        *v = b2 * *v + (1.0 - b2) * *g * *g;
        *w -= step * *m / ((*v).sqrt() / sqrt_c2 + cfg.epsilon);
        *g = 0.0;
    }
    Ok(())
}
