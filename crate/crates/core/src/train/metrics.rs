//! Recognition accuracy and confusion matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Counts indexed `[predicted][true]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, predicted: usize, actual: usize) {
        self.counts[predicted][actual] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    /// Each row divided by its total; rows without predictions stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            0.0
                        } else {
                            c as f64 / total as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn correct(&self) -> usize {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Percentage of correctly classified samples; the mean over repeats
    /// when several are aggregated.
    pub accuracy: f64,
    pub repeat_accuracies: Vec<f64>,
    pub confusion: ConfusionMatrix,
}

impl Metrics {
    /// Combines per-repeat results: mean accuracy, summed confusion counts.
    pub fn aggregate(repeats: &[Metrics]) -> Result<Metrics> {
        let first = repeats
            .first()
            .ok_or_else(|| invalid!("no repeats to aggregate"))?;
        let mut confusion = ConfusionMatrix::new(first.confusion.classes());
        let mut accs = Vec::new();
        for m in repeats {
            confusion.merge(&m.confusion);
            accs.extend_from_slice(&m.repeat_accuracies);
        }
        Ok(Metrics {
            accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
            repeat_accuracies: accs,
            confusion,
        })
    }
}

/// `100 * correct / total`.
pub fn recognition_accuracy(correct: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(invalid!("accuracy of an empty sample set is undefined"));
    }
    Ok(100.0 * correct as f64 / total as f64)
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f32]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn metrics_from_predictions(
    predicted: &[usize],
    labels: &[usize],
    classes: usize,
) -> Result<Metrics> {
    if predicted.len() != labels.len() {
        return Err(invalid!(
            "{} predictions for {} labels",
            predicted.len(),
            labels.len()
        ));
    }
    let mut confusion = ConfusionMatrix::new(classes);
    for (&p, &l) in predicted.iter().zip(labels) {
        if p >= classes || l >= classes {
            return Err(invalid!("class index out of range for {classes} classes"));
        }
        confusion.record(p, l);
    }
    let accuracy = recognition_accuracy(confusion.correct(), labels.len())?;
    Ok(Metrics {
        accuracy,
        repeat_accuracies: vec![accuracy],
        confusion,
    })
}
