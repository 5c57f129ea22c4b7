//! Mini-batch training with early stopping and learning-rate-on-plateau.
//!
//! Each epoch: seeded shuffle, forward/backward/optimizer step per batch,
//! validation pass, then the plateau callback followed by the early-stop
//! callback. The weights of the best validation epoch are restored at the
//! end. Runs are bit-reproducible from `TrainConfig::seed`.

mod callbacks;

pub use callbacks::{
    EarlyStopConfig, EarlyStopDecision, EarlyStopState, PlateauConfig, PlateauState,
};

use crate::data::{batches, Dataset};
use crate::error::{EcgError, Result};
use crate::eval::logits_parallel;
use crate::kernel::{adam_step, argmax, softmax_cross_entropy, OptimizerConfig, Signal};
use crate::model::Model;
use crate::rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub early_stop: EarlyStopConfig,
    pub plateau: PlateauConfig,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
    /// Worker threads for the validation pass; results do not depend on it.
    pub eval_threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        Self {
            batch_size: 128,
            learning_rate: 1e-3,
            max_epochs: 100,
            seed: 42,
            early_stop: EarlyStopConfig::default(),
            plateau: PlateauConfig::default(),
            beta1: opt.beta1,
            beta2: opt.beta2,
            epsilon: opt.epsilon,
            eval_threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EcgError::InvalidArgument(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if self.early_stop.patience == 0 || self.plateau.patience == 0 {
            return bad("callback patience must be at least 1");
        }
        if !(self.plateau.factor > 0.0 && self.plateau.factor < 1.0) {
            return bad("plateau factor must lie in (0, 1)");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.plateau.min_lr) || !positive(self.learning_rate) {
            return bad("learning rates must be positive");
        }
        self.optimizer(self.learning_rate).validate()
    }

    fn optimizer(&self, lr: f64) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: lr as f32,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    /// Learning rate used during this epoch.
    pub lr: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn total_seconds(&self) -> f64 {
        self.epochs.iter().map(|e| e.wall_seconds).sum()
    }

    pub fn best_val_acc(&self) -> Option<f64> {
        self.epochs.iter().map(|e| e.val_acc).reduce(f64::max)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for e in &self.epochs {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| EcgError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| EcgError::io(path, e))
    }
}

/// Inputs already pushed through layers `..from` of the model.
pub(crate) struct Prepared {
    pub signals: Vec<Signal>,
    pub labels: Vec<usize>,
}

impl Prepared {
    pub fn raw(ds: &Dataset) -> Self {
        Self {
            signals: ds.signals(),
            labels: ds.label_vec(),
        }
    }
}

fn check_labels(model: &Model, ds: &Dataset, what: &str) -> Result<()> {
    if ds.n_classes() != model.n_classes() {
        return Err(EcgError::Data(format!(
            "{what} set has {} classes, model has {}",
            ds.n_classes(),
            model.n_classes()
        )));
    }
    if ds.sample_length() != model.input_length() {
        return Err(EcgError::Shape(format!(
            "{what} beats have {} samples, model expects {}",
            ds.sample_length(),
            model.input_length()
        )));
    }
    Ok(())
}

/// Trains every parameter of `model`; returns the best-validation weights.
pub fn train(
    model: Model,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TrainConfig,
) -> Result<(Model, TrainHistory)> {
    train_with(model, train_set, val_set, config, |_| {})
}

/// Like [`train`], calling `on_epoch` after every epoch.
pub fn train_with(
    model: Model,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Model, TrainHistory)> {
    check_labels(&model, train_set, "training")?;
    check_labels(&model, val_set, "validation")?;
    let trainable: Vec<usize> = (0..model.params().len()).collect();
    fit(
        model,
        &Prepared::raw(train_set),
        &Prepared::raw(val_set),
        0,
        &trainable,
        config,
        on_epoch,
    )
}

/// Mean loss and accuracy of layers `from..` over prepared inputs.
fn validate(model: &Model, data: &Prepared, from: usize, threads: usize) -> Result<(f64, f64)> {
    let logits = logits_parallel(model, &data.signals, from, threads)?;
    let mut loss = 0.0f64;
    let mut correct = 0usize;
    for (row, &label) in logits.iter().zip(&data.labels) {
        loss += f64::from(softmax_cross_entropy(row, label)?.loss);
        correct += usize::from(argmax(row) == label);
    }
    let n = data.labels.len().max(1) as f64;
    Ok((loss / n, correct as f64 / n))
}

pub(crate) fn fit(
    mut model: Model,
    train_data: &Prepared,
    val_data: &Prepared,
    from: usize,
    trainable: &[usize],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Model, TrainHistory)> {
    config.validate()?;
    if train_data.labels.is_empty() || val_data.labels.is_empty() {
        return Err(EcgError::Data("training and validation sets must be non-empty".into()));
    }
    let mut early = EarlyStopState::new(config.early_stop);
    let mut plateau = PlateauState::new(config.plateau, config.learning_rate);
    let mut history = TrainHistory::default();

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        let lr = plateau.current_lr;
        let opt = config.optimizer(lr);
        let order = batches(
            train_data.labels.len(),
            config.batch_size,
            Some(rng::derive_seed(config.seed, epoch as u64)),
        );
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (batch_no, batch) in order.iter().enumerate() {
            model.zero_grad();
            let scale = 1.0 / batch.len() as f32;
            for &i in batch {
                let step = model
                    .accumulate_gradients(&train_data.signals[i], train_data.labels[i], from, scale)
                    .map_err(|e| match e {
                        EcgError::Numeric(m) => EcgError::Numeric(format!(
                            "epoch {epoch}, batch {}: {m}",
                            batch_no + 1
                        )),
                        other => other,
                    })?;
                if !step.loss.is_finite() {
                    return Err(EcgError::Numeric(format!(
                        "non-finite loss at epoch {epoch}, batch {}",
                        batch_no + 1
                    )));
                }
                loss_sum += f64::from(step.loss);
                correct += usize::from(argmax(&step.logits) == train_data.labels[i]);
            }
            for &p in trainable {
                adam_step(&mut model.params_mut()[p], &opt).map_err(|e| {
                    EcgError::Numeric(format!("epoch {epoch}, batch {}: {e}", batch_no + 1))
                })?;
            }
        }
        let n = train_data.labels.len() as f64;
        let (val_loss, val_acc) = validate(&model, val_data, from, config.eval_threads)?;

        plateau.update(val_acc);
        let decision = early.update(val_acc);
        if decision == EarlyStopDecision::Improved {
            early.best_weights = Some(model.params().iter().map(|p| p.values.clone()).collect());
        }
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / n,
            train_acc: correct as f64 / n,
            val_loss,
            val_acc,
            lr,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        history.epochs.push(record);
        if decision == EarlyStopDecision::Stop {
            history.stopped_early = true;
            break;
        }
    }

    history.best_epoch = early.best_epoch;
    if let Some(best) = early.best_weights.take() {
        for (p, values) in model.params_mut().iter_mut().zip(best) {
            p.values = values;
        }
    }
    Ok((model, history))
}
