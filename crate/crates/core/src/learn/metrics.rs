//! Node purity and the precision/recall/F1 evaluation report.

use super::{predict, Model};
use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};
use crate::featurize::FeatureVector;
use serde::{Deserialize, Serialize};

/// Purity of a class-fraction vector: the sum of squared fractions. For two
/// classes the value lies in [1/2, 1]; 1 means a pure node. Input must be a
/// probability vector (non-negative, summing to 1 within 1e-9).
pub fn gini_index(class_fractions: &[f64]) -> Result<f64> {
    if class_fractions.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::Contract(
            "gini_index: fractions must be non-negative and finite".into(),
        ));
    }
    let sum: f64 = class_fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "gini_index: fractions sum to {sum}, expected 1"
        )));
    }
    Ok(class_fractions.iter().map(|p| p * p).sum())
}

/// Conventional gini impurity: 1 minus the purity above.
pub fn gini_impurity(class_fractions: &[f64]) -> Result<f64> {
    Ok(1.0 - gini_index(class_fractions)?)
}

/// Per-class precision/recall/F1 with macro averages and the confusion
/// matrix (rows = true class, columns = predicted class, both in
/// class-alphabet order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub class_alphabet: Vec<u32>,
    /// Optional display names aligned with the alphabet.
    pub class_names: Option<Vec<String>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<usize>,
    pub confusion: Vec<Vec<usize>>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub notes: Vec<String>,
}

/// Evaluate a model over a labeled dataset.
pub fn evaluate(model: &Model, ds: &LabeledDataset<FeatureVector>) -> Result<EvalReport> {
    if ds.is_empty() {
        return Err(Error::Contract("evaluate: dataset is empty".into()));
    }
    let mut truth = Vec::with_capacity(ds.len());
    let mut predicted = Vec::with_capacity(ds.len());
    for (x, label) in &ds.records {
        truth.push(*label);
        predicted.push(predict(model, x)?.label);
    }
    let mut alphabet = model.class_alphabet.clone();
    for l in &truth {
        if !alphabet.contains(l) {
            alphabet.push(*l);
        }
    }
    alphabet.sort_unstable();
    Ok(evaluate_predictions(&truth, &predicted, &alphabet))
}

/// Build a report from parallel truth/prediction label slices.
pub fn evaluate_predictions(truth: &[u32], predicted: &[u32], alphabet: &[u32]) -> EvalReport {
    let k = alphabet.len();
    let index_of = |label: u32| alphabet.iter().position(|c| *c == label);
    let mut confusion = vec![vec![0usize; k]; k];
    for (t, p) in truth.iter().zip(predicted) {
        let (Some(ti), Some(pi)) = (index_of(*t), index_of(*p)) else {
            continue;
        };
        confusion[ti][pi] += 1;
    }

    let mut precision = vec![0.0; k];
    let mut recall = vec![0.0; k];
    let mut f1 = vec![0.0; k];
    let mut support = vec![0usize; k];
    let mut notes = Vec::new();
    for i in 0..k {
        let tp = confusion[i][i];
        let pred_total: usize = (0..k).map(|r| confusion[r][i]).sum();
        let true_total: usize = confusion[i].iter().sum();
        support[i] = true_total;
        precision[i] = if pred_total == 0 {
            notes.push(format!(
                "class {} absent from predictions; precision defined as 0",
                alphabet[i]
            ));
            0.0
        } else {
            tp as f64 / pred_total as f64
        };
        recall[i] = if true_total == 0 {
            0.0
        } else {
            tp as f64 / true_total as f64
        };
        f1[i] = if precision[i] + recall[i] > 0.0 {
            2.0 * precision[i] * recall[i] / (precision[i] + recall[i])
        } else {
            0.0
        };
    }
    let kf = k as f64;
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let total: usize = truth.len();
    EvalReport {
        class_alphabet: alphabet.to_vec(),
        class_names: None,
        macro_precision: precision.iter().sum::<f64>() / kf,
        macro_recall: recall.iter().sum::<f64>() / kf,
        macro_f1: f1.iter().sum::<f64>() / kf,
        accuracy: if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        },
        precision,
        recall,
        f1,
        support,
        confusion,
        notes,
    }
}

impl EvalReport {
    pub fn with_class_names(mut self, names: &[&str]) -> Self {
        self.class_names = Some(names.iter().map(|s| s.to_string()).collect());
        self
    }

    fn display_name(&self, i: usize) -> String {
        match &self.class_names {
            Some(names) if i < names.len() => names[i].clone(),
            _ => format!("class-{}", self.class_alphabet[i]),
        }
    }

    /// Aligned plain-text table, four decimals per metric.
    pub fn to_text_table(&self) -> String {
        let name_width = (0..self.class_alphabet.len())
            .map(|i| self.display_name(i).len())
            .chain(["Macro avg".len()])
            .max()
            .unwrap_or(9);
        let mut out = String::new();
        out.push_str(&format!(
            "{:<name_width$}  {:>9}  {:>9}  {:>9}  {:>8}\n",
            "Class", "Precision", "Recall", "F1-score", "Support"
        ));
        for i in 0..self.class_alphabet.len() {
            out.push_str(&format!(
                "{:<name_width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}\n",
                self.display_name(i),
                self.precision[i],
                self.recall[i],
                self.f1[i],
                self.support[i]
            ));
        }
        out.push_str(&format!(
            "{:<name_width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}\n",
            "Macro avg",
            self.macro_precision,
            self.macro_recall,
            self.macro_f1,
            self.support.iter().sum::<usize>()
        ));
        out
    }
}
