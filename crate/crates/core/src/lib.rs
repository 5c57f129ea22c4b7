//! Heartbeat arrhythmia classification with 1-D residual convolutional
//! networks.
//!
//! The crate covers the whole pipeline for single-lead, fixed-length beats:
//! numeric kernels ([`kernel`]), the original 11-conv and the slimmer 6-conv
//! networks ([`model`]), dataset handling ([`data`]), training with early
//! stopping and LR-on-plateau ([`train`]), five-to-two class transfer
//! ([`transfer`]) and evaluation/benchmarking ([`eval`]).

pub mod data;
pub mod error;
pub mod eval;
pub mod kernel;
pub mod model;
pub mod rng;
pub mod train;
pub mod transfer;

pub use data::{BeatRecord, Dataset, LabelMap};
pub use error::{EcgError, Result};
pub use kernel::{OptimizerConfig, ParamTensor, Signal};
pub use model::{build_modified, build_original, Arch, Model, ModelSpec};
pub use train::{TrainConfig, TrainHistory};
pub use transfer::TransferConfig;
