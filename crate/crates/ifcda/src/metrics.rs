//! Hard-label extraction and evaluation metrics.
//!
//! Closed-set runs report overall accuracy. Open-set runs report the
//! normalized (mean per-class) accuracies: OS over all C+1 classes present
//! in the ground truth, OS* over the known classes only, and UNK on the
//! unknown class. When every class is present these satisfy
//! OS = (C * OS* + UNK) / (C + 1).

use crate::dataset::SoftLabelMatrix;
use crate::error::{Error, Result};
use crate::Scenario;

/// Index of the largest value; ties break to the lower index.
pub(crate) fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Extract 1-based digital labels from normalized soft labels. Closed-set
/// prediction ignores the novel row; open-set takes the argmax over all
/// C+1 rows.
pub fn predict_hard(f: &SoftLabelMatrix, scenario: Scenario) -> Result<Vec<usize>> {
    if !f.is_normalized() {
        return Err(Error::Parameter(
            "prediction requires a normalized label matrix".into(),
        ));
    }
    let rows = match scenario {
        Scenario::Csda => f.class_count(),
        Scenario::Osda => f.class_count() + 1,
    };
    Ok((0..f.sample_count())
        .map(|j| argmax_lowest((0..rows).map(|i| f.probs()[(i, j)])) + 1)
        .collect())
}

/// Accuracy of one class present in the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAccuracy {
    /// 1-based class label (C+1 is the unknown class).
    pub class: usize,
    pub correct: usize,
    pub count: usize,
}

impl ClassAccuracy {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.count as f64
    }
}

/// Evaluation summary for one prediction vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: Scenario,
    /// Shared class count C.
    pub class_count: usize,
    /// Total correct / total samples.
    pub overall_accuracy: f64,
    /// Mean per-class accuracy over the classes present (1..=C+1).
    pub os: Option<f64>,
    /// Mean per-class accuracy over the known classes present (1..=C).
    pub os_star: Option<f64>,
    /// Accuracy on the unknown class, when present in the truth.
    pub unk: Option<f64>,
    /// Classes present in the ground truth, ascending.
    pub per_class: Vec<ClassAccuracy>,
    /// (C+1) x (C+1) counts indexed [truth-1][predicted-1].
    pub confusion: Vec<Vec<usize>>,
}

/// Compare predictions against ground truth. Classes absent from the truth
/// are skipped in the per-class means; predictions of absent classes only
/// show up as confusion counts.
pub fn compute_metrics(
    predicted: &[usize],
    truth: &[usize],
    class_count: usize,
    scenario: Scenario,
) -> Result<MetricsReport> {
    if truth.is_empty() {
        return Err(Error::Metric("empty ground truth".into()));
    }
    if predicted.len() != truth.len() {
        return Err(Error::Metric(format!(
            "prediction count {} does not match truth count {}",
            predicted.len(),
            truth.len()
        )));
    }
    let all = class_count + 1;
    for (&p, &t) in predicted.iter().zip(truth) {
        if t < 1 || t > all {
            return Err(Error::Label(format!("truth label {t} outside 1..={all}")));
        }
        if p < 1 || p > all {
            return Err(Error::Label(format!(
                "predicted label {p} outside 1..={all}"
            )));
        }
    }

    let mut confusion = vec![vec![0usize; all]; all];
    for (&p, &t) in predicted.iter().zip(truth) {
        confusion[t - 1][p - 1] += 1;
    }

    let mut per_class = Vec::new();
    for class in 1..=all {
        let count: usize = confusion[class - 1].iter().sum();
        if count > 0 {
            per_class.push(ClassAccuracy {
                class,
                correct: confusion[class - 1][class - 1],
                count,
            });
        }
    }

    let total_correct: usize = (0..all).map(|i| confusion[i][i]).sum();
    let overall_accuracy = total_correct as f64 / truth.len() as f64;

    let mean_over = |classes: &mut dyn Iterator<Item = &ClassAccuracy>| -> Option<f64> {
        let accs: Vec<f64> = classes.map(ClassAccuracy::accuracy).collect();
        if accs.is_empty() {
            None
        } else {
            Some(accs.iter().sum::<f64>() / accs.len() as f64)
        }
    };
    let os = mean_over(&mut per_class.iter());
    let os_star = mean_over(&mut per_class.iter().filter(|c| c.class <= class_count));
    let unk = per_class
        .iter()
        .find(|c| c.class == class_count + 1)
        .map(ClassAccuracy::accuracy);

    Ok(MetricsReport {
        scenario,
        class_count,
        overall_accuracy,
        os,
        os_star,
        unk,
        per_class,
        confusion,
    })
}
