use super::{ConfusionMatrix, Evaluation, LatencyReport, ThroughputReport};
use crate::error::{EcgError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// JSON evaluation report. Metric floats are rounded to 4 decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: String,
    pub confusion_matrix: Option<ConfusionMatrix>,
    pub per_class: Vec<ClassReport>,
    pub accuracy: Option<f64>,
    pub throughput: Option<ThroughputReport>,
    pub latency: Option<LatencyReport>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

impl Report {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            confusion_matrix: None,
            per_class: Vec::new(),
            accuracy: None,
            throughput: None,
            latency: None,
        }
    }

    pub fn with_evaluation(mut self, eval: &Evaluation, label_names: &[String]) -> Self {
        self.per_class = eval
            .metrics
            .per_class
            .iter()
            .zip(label_names)
            .map(|(s, name)| ClassReport {
                label: name.clone(),
                precision: round4(s.precision),
                recall: round4(s.recall),
                f1: round4(s.f1),
                support: s.support,
            })
            .collect();
        self.accuracy = Some(round4(eval.metrics.accuracy));
        self.confusion_matrix = Some(eval.confusion.clone());
        self
    }

    pub fn with_throughput(mut self, t: ThroughputReport) -> Self {
        self.throughput = Some(t);
        self
    }

    pub fn with_latency(mut self, l: LatencyReport) -> Self {
        self.latency = Some(l);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| EcgError::io(path, e))
    }
}

/// Plain-text table in the usual precision/recall/F1/support layout.
impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if !self.per_class.is_empty() {
            writeln!(f, "{:<18} {:>9} {:>9} {:>9} {:>9}", "class", "precision", "recall", "f1", "support")?;
            for c in &self.per_class {
                writeln!(
                    f,
                    "{:<18} {:>9.4} {:>9.4} {:>9.4} {:>9}",
                    c.label, c.precision, c.recall, c.f1, c.support
                )?;
            }
        }
        if let Some(acc) = self.accuracy {
            writeln!(f, "accuracy {acc:.4}")?;
        }
        if let Some(cm) = &self.confusion_matrix {
            writeln!(f, "confusion (rows = true, cols = predicted):")?;
            for row in cm.counts() {
                let cells: Vec<String> = row.iter().map(|c| format!("{c:>7}")).collect();
                writeln!(f, "{}", cells.join(" "))?;
            }
        }
        if let Some(t) = &self.throughput {
            writeln!(
                f,
                "throughput {:.1} samples/s (batch {}, {} repeats, {:.3} s)",
                t.samples_per_second, t.batch_size, t.repeats, t.wall_seconds
            )?;
        }
        if let Some(l) = &self.latency {
            writeln!(
                f,
                "latency p50 {:.3} ms  p95 {:.3} ms  p99 {:.3} ms  max {:.3} ms  rate {:.1}/s",
                l.p50_ms, l.p95_ms, l.p99_ms, l.max_ms, l.achieved_rate
            )?;
        }
        Ok(())
    }
}
