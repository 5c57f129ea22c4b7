use serde::{Deserialize, Serialize};

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    /// Labels and predictions must be `< n_classes`.
    pub fn from_pairs(n_classes: usize, labels: &[usize], predictions: &[usize]) -> Self {
        let mut m = Self::new(n_classes);
        for (&t, &p) in labels.iter().zip(predictions) {
            m.counts[t][p] += 1;
        }
        m
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }

    pub fn metrics(&self) -> ClassMetrics {
        let per_class = (0..self.n_classes())
            .map(|c| {
                let tp = self.counts[c][c];
                let precision = ratio(tp, self.predicted(c));
                let recall = ratio(tp, self.support(c));
                ClassScore {
                    precision,
                    recall,
                    f1: f1(precision, recall),
                    support: self.support(c),
                }
            })
            .collect();
        ClassMetrics {
            per_class,
            accuracy: self.accuracy(),
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub per_class: Vec<ClassScore>,
    pub accuracy: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let labels = [0, 1, 2, 2, 1, 0, 0];
        let m = ConfusionMatrix::from_pairs(3, &labels, &labels);
        assert_eq!(m.trace(), 7);
        assert_eq!(m.accuracy(), 1.0);
        for s in m.metrics().per_class {
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn binary_all_wrong() {
        let m = ConfusionMatrix::from_pairs(2, &[0, 1, 1, 0], &[1, 0, 0, 1]);
        let metrics = m.metrics();
        assert_eq!(metrics.accuracy, 0.0);
        for s in metrics.per_class {
            assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn hand_counted() {
        // truth 0: predicted 0,0,1 ; truth 1: predicted 1
        let m = ConfusionMatrix::from_pairs(2, &[0, 0, 0, 1], &[0, 0, 1, 1]);
        let s = m.metrics().per_class;
        assert_eq!(s[0].precision, 1.0);
        assert!((s[0].recall - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s[1].precision, 0.5);
        assert_eq!(s[1].recall, 1.0);
        assert!((s[1].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.support(0), 3);
    }
}
