//! Segmentation and classification metrics with per-item reports.
//!
//! Ratios whose denominator is zero (e.g. sensitivity on an image with no
//! lesion) are defined as 1 and recorded in [`Metrics::undefined`].

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dataset::{BinaryMask, Class, LabelTable, SubmissionRow};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Tallies one prediction/truth pair; `true` is the positive class.
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

/// Pixel confusion with lesion as the positive class.
pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<Confusion> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut c = Confusion::default();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        c.record(p, t);
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub dice: f64,
    pub jaccard: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Names of metrics whose value came from the 0/0 = 1 convention.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<&'static str>,
}

impl Metrics {
    pub fn values(&self) -> [f64; 5] {
        [
            self.accuracy,
            self.dice,
            self.jaccard,
            self.sensitivity,
            self.specificity,
        ]
    }
}

pub const METRIC_NAMES: [&str; 5] = ["accuracy", "dice", "jaccard", "sensitivity", "specificity"];

pub fn metrics(c: &Confusion) -> Metrics {
    let mut undefined = Vec::new();
    let mut ratio = |name: &'static str, num: u64, den: u64| {
        if den == 0 {
            undefined.push(name);
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = ratio("accuracy", c.tp + c.tn, c.total());
    let dice = ratio("dice", 2 * c.tp, 2 * c.tp + c.fp + c.fn_);
    let jaccard = ratio("jaccard", c.tp, c.tp + c.fp + c.fn_);
    let sensitivity = ratio("sensitivity", c.tp, c.tp + c.fn_);
    let specificity = ratio("specificity", c.tn, c.tn + c.fp);
    Metrics {
        accuracy,
        dice,
        jaccard,
        sensitivity,
        specificity,
        undefined,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItemRow {
    pub item: String,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Overall {
    pub items: usize,
    pub accuracy: f64,
    pub dice: f64,
    pub jaccard: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Items with at least one metric set by the 0/0 convention.
    pub flagged_items: Vec<String>,
}

/// Per-item rows plus their unweighted means.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<ItemRow>,
    pub overall: Overall,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<ItemRow>) -> Self {
        let n = rows.len();
        let mut sums = [0.0; 5];
        for row in &rows {
            for (s, v) in sums.iter_mut().zip(row.metrics.values()) {
                *s += v;
            }
        }
        let mean = |k: usize| if n == 0 { 0.0 } else { sums[k] / n as f64 };
        let flagged_items = rows
            .iter()
            .filter(|r| !r.metrics.undefined.is_empty())
            .map(|r| r.item.clone())
            .collect();
        Self {
            overall: Overall {
                items: n,
                accuracy: mean(0),
                dice: mean(1),
                jaccard: mean(2),
                sensitivity: mean(3),
                specificity: mean(4),
                flagged_items,
            },
            rows,
        }
    }

    /// `item,accuracy,dice,jaccard,sensitivity,specificity`, one row per item.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item,accuracy,dice,jaccard,sensitivity,specificity\n");
        for row in &self.rows {
            let m = &row.metrics;
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                row.item, m.accuracy, m.dice, m.jaccard, m.sensitivity, m.specificity
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Pairs predicted and ground-truth masks by id and evaluates each pair.
pub fn evaluate_segmentation(pairs: &[(String, BinaryMask, BinaryMask)]) -> Result<EvalReport> {
    let rows = pairs
        .iter()
        .map(|(id, pred, truth)| {
            let c = confusion(pred, truth)?;
            Ok(ItemRow {
                item: id.clone(),
                confusion: c,
                metrics: metrics(&c),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_rows(rows))
}

pub const SCORE_THRESHOLD: f64 = 0.5;

/// Three-way decision from the two one-vs-rest scores: melanoma wins ties.
pub fn class_from_scores(melanoma: f64, seborrheic_keratosis: f64) -> Class {
    if melanoma > SCORE_THRESHOLD && melanoma >= seborrheic_keratosis {
        Class::Melanoma
    } else if seborrheic_keratosis > SCORE_THRESHOLD && seborrheic_keratosis > melanoma {
        Class::SeborrheicKeratosis
    } else {
        Class::Nevus
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskResult {
    pub task: &'static str,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub tasks: Vec<TaskResult>,
    /// Fraction of images whose three-way class is correct.
    pub accuracy: f64,
    pub items: usize,
}

impl ClassificationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item,accuracy,dice,jaccard,sensitivity,specificity\n");
        for t in &self.tasks {
            let m = &t.metrics;
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                t.task, m.accuracy, m.dice, m.jaccard, m.sensitivity, m.specificity
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Scores the melanoma-vs-rest and keratosis-vs-rest tasks at threshold 0.5
/// plus three-class accuracy. Every prediction must have a label and vice versa.
pub fn classification_metrics(
    predictions: &[SubmissionRow],
    truth: &LabelTable,
) -> Result<ClassificationReport> {
    let predicted_ids: BTreeSet<&str> = predictions.iter().map(|r| r.image_id.as_str()).collect();
    if predicted_ids.len() != predictions.len() {
        return Err(Error::InvalidInput("duplicate image ids in predictions".into()));
    }
    let truth_ids: BTreeSet<&str> = truth.iter().map(|(id, _)| id).collect();
    let missing: Vec<&str> = predicted_ids.difference(&truth_ids).copied().collect();
    let extra: Vec<&str> = truth_ids.difference(&predicted_ids).copied().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::InvalidInput(format!(
            "id mismatch: without label {missing:?}; without prediction {extra:?}"
        )));
    }

    let mut mel = Confusion::default();
    let mut sk = Confusion::default();
    let mut correct = 0usize;
    for row in predictions {
        let actual = truth.get(&row.image_id).expect("ids checked above");
        mel.record(row.melanoma > SCORE_THRESHOLD, actual == Class::Melanoma);
        sk.record(
            row.seborrheic_keratosis > SCORE_THRESHOLD,
            actual == Class::SeborrheicKeratosis,
        );
        if class_from_scores(row.melanoma, row.seborrheic_keratosis) == actual {
            correct += 1;
        }
    }
    let n = predictions.len();
    Ok(ClassificationReport {
        tasks: vec![
            TaskResult {
                task: "melanoma",
                confusion: mel,
                metrics: metrics(&mel),
            },
            TaskResult {
                task: "seborrheic_keratosis",
                confusion: sk,
                metrics: metrics(&sk),
            },
        ],
        accuracy: if n == 0 { 1.0 } else { correct as f64 / n as f64 },
        items: n,
    })
}

/// Writes `report.to_json()` to `path` and the flat CSV next to it
/// (same stem, `.csv` extension).
pub fn write_report(json: &str, csv: &str, path: &Path) -> Result<()> {
    std::fs::write(path, json).map_err(|e| Error::io(path, e))?;
    let csv_path = path.with_extension("csv");
    if csv_path == path {
        return Err(Error::InvalidInput(format!(
            "report path {} must not end in .csv",
            path.display()
        )));
    }
    std::fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))
}
