//! Cross-database model transfer: take a five-class base network, swap its
//! output layer for a two-class one and fine-tune on the target beats.
//!
//! With `freeze_features` (the default) the convolutional stack is fixed, so
//! its output is computed once per beat and only the dense head is trained.

use crate::data::Dataset;
use crate::error::{EcgError, Result};
use crate::eval::features_parallel;
use crate::model::{load_checkpoint, Model};
use crate::train::{fit, EpochRecord, Prepared, TrainConfig, TrainHistory};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Classes the base model must have been trained on.
pub const BASE_CLASSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    pub freeze_features: bool,
    pub train: TrainConfig,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            freeze_features: true,
            train: TrainConfig::default(),
        }
    }
}

pub fn transfer_fit(
    base: Model,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TransferConfig,
) -> Result<(Model, TrainHistory)> {
    transfer_fit_with(base, train_set, val_set, config, |_| {})
}

pub fn transfer_fit_with(
    mut model: Model,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TransferConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Model, TrainHistory)> {
    if model.n_classes() != BASE_CLASSES {
        return Err(EcgError::Checkpoint(format!(
            "transfer base must be a {BASE_CLASSES}-class model, got {} classes",
            model.n_classes()
        )));
    }
    for (ds, what) in [(train_set, "training"), (val_set, "validation")] {
        if ds.sample_length() != model.input_length() {
            return Err(EcgError::Checkpoint(format!(
                "base model expects {} samples, {what} beats have {}",
                model.input_length(),
                ds.sample_length()
            )));
        }
    }
    if train_set.labels() != val_set.labels() {
        return Err(EcgError::Data("training and validation label sets differ".into()));
    }
    model.replace_head(train_set.labels().names().to_vec(), config.train.seed)?;
    for p in model.params_mut() {
        p.reset_moments();
    }

    if config.freeze_features {
        let from = model.head_start();
        let trainable = model.head_param_indices();
        let threads = config.train.eval_threads;
        let prep = |ds: &Dataset| -> Result<Prepared> {
            Ok(Prepared {
                signals: features_parallel(&model, &ds.signals(), threads)?,
                labels: ds.label_vec(),
            })
        };
        let (train_data, val_data) = (prep(train_set)?, prep(val_set)?);
        fit(model, &train_data, &val_data, from, &trainable, &config.train, on_epoch)
    } else {
        let trainable: Vec<usize> = (0..model.params().len()).collect();
        fit(
            model,
            &Prepared::raw(train_set),
            &Prepared::raw(val_set),
            0,
            &trainable,
            &config.train,
            on_epoch,
        )
    }
}

pub fn transfer_from_checkpoint(
    base_checkpoint: impl AsRef<Path>,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TransferConfig,
) -> Result<(Model, TrainHistory)> {
    let base = load_checkpoint(base_checkpoint)?;
    transfer_fit(base, train_set, val_set, config)
}
