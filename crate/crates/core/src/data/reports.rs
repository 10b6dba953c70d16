//! Loss-curve CSV, metrics report and confusion-matrix CSV writers.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::train::{EpochRecord, Metrics};

pub fn curve_csv(curve: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_accuracy\n");
    for r in curve {
        let val = r.val_accuracy.map(|a| a.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, val));
    }
    out
}

pub fn write_curve_csv(path: &Path, curve: &[EpochRecord]) -> Result<()> {
    fs::write(path, curve_csv(curve)).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Report<'a> {
    accuracy: f64,
    repeat_accuracies: &'a [f64],
    correct: usize,
    total: usize,
    classes: &'a [String],
    /// Rows are predicted classes, columns true classes.
    confusion_counts: &'a [Vec<usize>],
    confusion: Vec<Vec<f64>>,
}

/// JSON report with the accuracy and the row-normalized confusion matrix
/// (rows predicted, columns true).
pub fn metrics_report(metrics: &Metrics, class_names: &[String]) -> Result<String> {
    if class_names.len() != metrics.confusion.classes() {
        return Err(invalid!(
            "{} class names for a {}-class confusion matrix",
            class_names.len(),
            metrics.confusion.classes()
        ));
    }
    let report = Report {
        accuracy: metrics.accuracy,
        repeat_accuracies: &metrics.repeat_accuracies,
        correct: metrics.confusion.correct(),
        total: metrics.confusion.total(),
        classes: class_names,
        confusion_counts: &metrics.confusion.counts,
        confusion: metrics.confusion.row_normalized(),
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    Ok(text)
}

pub fn write_metrics_report(path: &Path, metrics: &Metrics, class_names: &[String]) -> Result<()> {
    fs::write(path, metrics_report(metrics, class_names)?).map_err(|e| Error::io(path, e))
}

/// Row-normalized confusion matrix as CSV: a header of true class names,
/// then one row per predicted class.
pub fn confusion_csv(metrics: &Metrics, class_names: &[String]) -> Result<String> {
    if class_names.len() != metrics.confusion.classes() {
        return Err(invalid!("class names do not match the confusion matrix"));
    }
    let mut out = format!("predicted\\true,{}\n", class_names.join(","));
    for (name, row) in class_names.iter().zip(metrics.confusion.row_normalized()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&format!("{name},{}\n", cells.join(",")));
    }
    Ok(out)
}

pub fn write_confusion_csv(path: &Path, metrics: &Metrics, class_names: &[String]) -> Result<()> {
    fs::write(path, confusion_csv(metrics, class_names)?).map_err(|e| Error::io(path, e))
}
