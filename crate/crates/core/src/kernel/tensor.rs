use crate::error::{EcgError, Result};

/// A channelized 1-D signal stored row-major as `channels x length`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    channels: usize,
    length: usize,
    values: Vec<f32>,
}

impl Signal {
    pub fn new(channels: usize, length: usize, values: Vec<f32>) -> Result<Self> {
        if channels == 0 || length == 0 {
            return Err(EcgError::Shape(format!(
                "signal dimensions must be positive, got {channels}x{length}"
            )));
        }
        if values.len() != channels * length {
            return Err(EcgError::Shape(format!(
                "signal {channels}x{length} needs {} values, got {}",
                channels * length,
                values.len()
            )));
        }
        Ok(Self {
            channels,
            length,
            values,
        })
    }

    /// Single-channel signal.
    pub fn mono(values: Vec<f32>) -> Result<Self> {
        let len = values.len();
        Self::new(1, len, values)
    }

    pub fn zeros(channels: usize, length: usize) -> Self {
        Self {
            channels,
            length,
            values: vec![0.0; channels * length],
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        &self.values[c * self.length..(c + 1) * self.length]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let len = self.length;
        &mut self.values[c * len..(c + 1) * len]
    }

    /// Reinterprets the buffer as a `(channels * length) x 1` column.
    pub fn flatten(self) -> Self {
        Self {
            channels: self.channels * self.length,
            length: 1,
            values: self.values,
        }
    }

    pub fn reshape(self, channels: usize, length: usize) -> Result<Self> {
        Self::new(channels, length, self.values)
    }

    pub(crate) fn ensure_finite(&self, op: &str) -> Result<()> {
        if let Some(pos) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(EcgError::Numeric(format!(
                "{op}: non-finite input value at index {pos}"
            )));
        }
        Ok(())
    }
}

/// A trainable tensor with its gradient and adaptive-moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensor {
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
    pub grad: Vec<f32>,
    pub m: Vec<f32>,
    pub v: Vec<f32>,
    pub step_count: u64,
}

impl ParamTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if values.len() != n {
            return Err(EcgError::Shape(format!(
                "tensor of shape {shape:?} needs {n} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            shape,
            grad: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![0.0; n],
            values,
            step_count: 0,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self::new(shape, vec![0.0; n]).expect("length matches shape")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Drops optimizer state, keeping the values.
    pub fn reset_moments(&mut self) {
        self.m.iter_mut().for_each(|x| *x = 0.0);
        self.v.iter_mut().for_each(|x| *x = 0.0);
        self.step_count = 0;
        self.zero_grad();
    }
}
