//! Numeric primitives on channelized 1-D signals: forward and backward passes
//! for convolution, pooling, ReLU, dense and softmax cross-entropy, plus the
//! adaptive-moment optimizer step.
//!
//! All ops are pure over caller-owned buffers. Backward functions accumulate
//! into `ParamTensor::grad`, so a batch is the sum of per-sample calls.

mod activation;
mod adam;
mod conv;
mod dense;
mod loss;
mod pool;
mod tensor;

pub use activation::{relu, relu_backward};
pub use adam::{adam_step, OptimizerConfig};
pub use conv::{conv1d, conv1d_backward};
pub use dense::{dense, dense_backward};
pub use loss::{argmax, softmax, softmax_cross_entropy, SoftmaxLoss};
pub use pool::{maxpool1d, maxpool1d_backward, Pooled};
pub use tensor::{ParamTensor, Signal};
