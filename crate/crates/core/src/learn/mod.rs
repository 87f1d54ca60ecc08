//! From-scratch classical classifiers: multinomial Naive Bayes, a gini
//! decision tree, and a linear SVM trained by seeded subgradient descent.
//! All three share one [`Model`] container, prediction rule (argmax with
//! ties toward the lower class index), and serialized format.

mod decision_tree;
mod metrics;
mod naive_bayes;
mod serialize;
mod svm;

pub use decision_tree::{best_split, Split, TreeNode};
pub use metrics::{evaluate, evaluate_predictions, gini_impurity, gini_index, EvalReport};
pub use serialize::{load_model, read_magic_json, save_model, write_magic_json};

use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};
use crate::featurize::FeatureVector;
use serde::{Deserialize, Serialize};

/// Which training algorithm to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    NaiveBayes,
    DecisionTree,
    LinearSvm,
}

impl std::str::FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nb" | "naive_bayes" => Ok(Classifier::NaiveBayes),
            "dt" | "decision_tree" => Ok(Classifier::DecisionTree),
            "svm" | "linear_svm" => Ok(Classifier::LinearSvm),
            other => Err(Error::Contract(format!(
                "unknown classifier {other:?} (expected nb, dt, or svm)"
            ))),
        }
    }
}

impl std::fmt::Display for Classifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classifier::NaiveBayes => "nb",
            Classifier::DecisionTree => "dt",
            Classifier::LinearSvm => "svm",
        };
        f.write_str(s)
    }
}

/// Training hyperparameters, with the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Additive smoothing for Naive Bayes.
    pub nb_alpha: f64,
    pub dt_max_depth: usize,
    pub dt_min_samples_leaf: usize,
    /// SVM regularization trade-off; lambda = 1 / (C * n).
    pub svm_c: f64,
    pub svm_epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            nb_alpha: 1.0,
            dt_max_depth: 12,
            dt_min_samples_leaf: 5,
            svm_c: 1.0,
            svm_epochs: 50,
        }
    }
}

/// A trained classifier. Immutable after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: Classifier,
    /// Ordered labels; scores and distributions follow this order.
    pub class_alphabet: Vec<u32>,
    pub feature_dimension: usize,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes {
        alpha: f64,
        log_priors: Vec<f64>,
        /// Per class, per feature: ln of the smoothed multinomial parameter.
        log_likelihoods: Vec<Vec<f64>>,
    },
    DecisionTree {
        root: TreeNode,
    },
    LinearSvm {
        /// One weight vector per class (one-vs-rest).
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: u32,
    /// Per-class scores in class-alphabet order: log-posteriors (NB), leaf
    /// distribution (DT), or margins (SVM).
    pub scores: Vec<f64>,
}

/// Argmax with ties broken toward the lower class index.
pub(crate) fn argmax_label(alphabet: &[u32], scores: &[f64]) -> u32 {
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    alphabet[best]
}

/// Train a classifier. Deterministic given the dataset order and seed.
pub fn train(
    kind: Classifier,
    ds: &LabeledDataset<FeatureVector>,
    hyperparams: &Hyperparams,
    seed: u64,
) -> Result<Model> {
    if ds.is_empty() {
        return Err(Error::Contract("training set is empty".into()));
    }
    if ds.class_alphabet.len() < 2 {
        return Err(Error::Data(format!(
            "training set has {} class(es); at least 2 required",
            ds.class_alphabet.len()
        )));
    }
    let dim = ds.records[0].0.dimension();
    for (i, (x, label)) in ds.records.iter().enumerate() {
        if x.dimension() != dim {
            return Err(Error::Data(format!(
                "record {i} has dimension {} but record 0 has {dim}",
                x.dimension()
            )));
        }
        if x.has_nan() {
            return Err(Error::Data(format!("record {i} contains a NaN feature")));
        }
        if !ds.class_alphabet.contains(label) {
            return Err(Error::Data(format!(
                "record {i} has label {label} outside the class alphabet"
            )));
        }
    }

    let params = match kind {
        Classifier::NaiveBayes => naive_bayes::train(ds, dim, hyperparams.nb_alpha)?,
        Classifier::DecisionTree => decision_tree::train(
            ds,
            dim,
            hyperparams.dt_max_depth,
            hyperparams.dt_min_samples_leaf,
        )?,
        Classifier::LinearSvm => {
            svm::train(ds, dim, hyperparams.svm_c, hyperparams.svm_epochs, seed)?
        }
    };
    Ok(Model {
        kind,
        class_alphabet: ds.class_alphabet.clone(),
        feature_dimension: dim,
        params,
    })
}

/// Score a single vector. Errors if the dimension does not match the model.
pub fn predict(model: &Model, x: &FeatureVector) -> Result<Prediction> {
    if x.dimension() != model.feature_dimension {
        return Err(Error::Contract(format!(
            "input dimension {} does not match model dimension {}",
            x.dimension(),
            model.feature_dimension
        )));
    }
    let scores = match &model.params {
        ModelParams::NaiveBayes {
            log_priors,
            log_likelihoods,
            ..
        } => naive_bayes::scores(x, log_priors, log_likelihoods),
        ModelParams::DecisionTree { root } => root.distribution_for(x).to_vec(),
        ModelParams::LinearSvm { weights, biases } => svm::margins(x, weights, biases),
    };
    Ok(Prediction {
        label: argmax_label(&model.class_alphabet, &scores),
        scores,
    })
}
