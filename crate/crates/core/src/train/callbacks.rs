//! Early-stopping and reduce-on-plateau state machines, both monitoring a
//! metric to maximize (validation accuracy).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopConfig {
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        Self {
            patience: 5,
            min_delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauConfig {
    pub patience: usize,
    pub factor: f64,
    pub min_lr: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            patience: 3,
            factor: 0.1,
            min_lr: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarlyStopDecision {
    /// New best metric; the caller should snapshot the weights.
    Improved,
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopState {
    config: EarlyStopConfig,
    pub best_metric: Option<f64>,
    /// 1-based epoch of the best metric.
    pub best_epoch: usize,
    pub epochs_since_improve: usize,
    epochs_seen: usize,
    /// Parameter values at `best_epoch`.
    pub best_weights: Option<Vec<Vec<f32>>>,
}

impl EarlyStopState {
    pub fn new(config: EarlyStopConfig) -> Self {
        Self {
            config,
            best_metric: None,
            best_epoch: 0,
            epochs_since_improve: 0,
            epochs_seen: 0,
            best_weights: None,
        }
    }

    /// Improvement means `metric > best + min_delta`; equal values do not count.
    pub fn update(&mut self, metric: f64) -> EarlyStopDecision {
        self.epochs_seen += 1;
        let improved = match self.best_metric {
            None => true,
            Some(best) => metric > best + self.config.min_delta,
        };
        if improved {
            self.best_metric = Some(metric);
            self.best_epoch = self.epochs_seen;
            self.epochs_since_improve = 0;
            return EarlyStopDecision::Improved;
        }
        self.epochs_since_improve += 1;
        if self.epochs_since_improve >= self.config.patience {
            EarlyStopDecision::Stop
        } else {
            EarlyStopDecision::Continue
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauState {
    config: PlateauConfig,
    pub best_metric: Option<f64>,
    pub stagnant_count: usize,
    pub current_lr: f64,
}

impl PlateauState {
    pub fn new(config: PlateauConfig, initial_lr: f64) -> Self {
        Self {
            config,
            best_metric: None,
            stagnant_count: 0,
            current_lr: initial_lr.max(config.min_lr),
        }
    }

    /// Returns the learning rate to use from the next epoch on.
    pub fn update(&mut self, metric: f64) -> f64 {
        let improved = self.best_metric.is_none_or(|best| metric > best);
        if improved {
            self.best_metric = Some(metric);
            self.stagnant_count = 0;
        } else {
            self.stagnant_count += 1;
            if self.stagnant_count >= self.config.patience {
                self.current_lr = (self.current_lr * self.config.factor).max(self.config.min_lr);
                self.stagnant_count = 0;
            }
        }
        self.current_lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_early(seq: &[f64], patience: usize) -> Option<usize> {
        let mut s = EarlyStopState::new(EarlyStopConfig {
            patience,
            min_delta: 0.0,
        });
        seq.iter()
            .position(|&m| s.update(m) == EarlyStopDecision::Stop)
            .map(|i| i + 1)
    }

    #[test]
    fn hand_traced_sequence() {
        let seq = [0.90, 0.91, 0.905, 0.906, 0.910, 0.909, 0.908];
        assert_eq!(run_early(&seq, 5), Some(7));
        let mut s = EarlyStopState::new(EarlyStopConfig::default());
        seq.iter().for_each(|&m| {
            s.update(m);
        });
        assert_eq!(s.best_epoch, 2);
    }

    #[test]
    fn increasing_never_stops() {
        let seq: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        assert_eq!(run_early(&seq, 5), None);
    }

    #[test]
    fn flat_stops_after_patience_plus_one() {
        assert_eq!(run_early(&[0.5; 20], 5), Some(6));
    }

    #[test]
    fn plateau_reduces_after_patience() {
        let mut p = PlateauState::new(PlateauConfig::default(), 1e-3);
        assert_eq!(p.update(0.8), 1e-3);
        assert_eq!(p.update(0.8), 1e-3);
        assert_eq!(p.update(0.7), 1e-3);
        let lr = p.update(0.8);
        assert!((lr - 1e-4).abs() < 1e-12);
        assert_eq!(p.stagnant_count, 0);
    }

    #[test]
    fn plateau_floor() {
        let mut p = PlateauState::new(PlateauConfig::default(), 1e-6);
        for _ in 0..10 {
            assert_eq!(p.update(0.5), 1e-6);
        }
    }

    #[test]
    fn plateau_improvement_resets() {
        let mut p = PlateauState::new(PlateauConfig::default(), 1e-3);
        p.update(0.8);
        p.update(0.8);
        p.update(0.8);
        assert_eq!(p.update(0.81), 1e-3);
        assert_eq!(p.stagnant_count, 0);
    }
}
