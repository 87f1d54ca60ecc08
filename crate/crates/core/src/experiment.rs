//! Experiment machinery shared by the CLI and the verification suites:
//! task-specific dataset assembly from labeled documents, per-fold feature
//! fitting, balanced stratified cross-validation, and the trained-bundle
//! file that packages a model with its feature pipeline.

use crate::corpus::{balance_classes, make_stratified_folds, LabeledDataset};
use crate::error::{Error, Result};
use crate::featurize::{build_header_vocabulary, fit_ngram_vectorizer, DEFAULT_STOPLIST};
use crate::ingest::Document;
use crate::learn::{
    evaluate_predictions, predict, read_magic_json, train, write_magic_json, Classifier,
    EvalReport, Hyperparams, Model,
};
use crate::semantics::{map_header_to_class, truncate_words, OntologyClassSet, DEFAULT_TRUNCATION};
use crate::structure::{detect_section_boundaries, oracle_headers, FeaturePipeline, VectorMode};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// The classification tasks the experiments cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Binary section-header vs regular-text over every line.
    Line,
    /// Header level in {1, 2, 3} over header lines only.
    Level,
    /// Single four-class model: regular-text plus the three header levels.
    FourClass,
    /// Ontology class over oracle-segmented sections.
    Semantic,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "line" => Ok(Task::Line),
            "level" => Ok(Task::Level),
            "four" | "four_class" => Ok(Task::FourClass),
            "semantic" => Ok(Task::Semantic),
            other => Err(Error::Contract(format!(
                "unknown task {other:?} (expected line, level, four, or semantic)"
            ))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Task::Line => "line",
            Task::Level => "level",
            Task::FourClass => "four",
            Task::Semantic => "semantic",
        };
        f.write_str(s)
    }
}

/// Vocabulary / vectorizer fitting knobs at desk scale. The corpus-scale
/// counterparts (header-word frequency over 100, n-gram dictionaries of
/// tens of thousands of terms) are configuration, not constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub vocab_min_frequency: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_df: usize,
    pub truncation: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            vocab_min_frequency: 3,
            ngram_min: 1,
            ngram_max: 3,
            min_df: 3,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

/// One item of a task dataset, still in raw text form so feature fitting
/// can happen per training split.
#[derive(Debug, Clone)]
pub struct TaskItem {
    /// Document and line position for line-level tasks; line is the header
    /// line for section items.
    pub doc_index: usize,
    pub line_index: usize,
    /// Full text used by text modes (section text for the semantic task).
    pub text: String,
    pub label: u32,
}

/// Raw items plus the header texts available for vocabulary building.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub task: Task,
    pub items: Vec<TaskItem>,
    pub class_names: Option<Vec<String>>,
}

/// Assemble the raw items of a task from ground-truth labeled documents.
pub fn task_data(
    task: Task,
    docs: &[Document],
    ont: &OntologyClassSet,
    config: &FeatureConfig,
) -> Result<TaskData> {
    let mut items = Vec::new();
    match task {
        Task::Line | Task::Level | Task::FourClass => {
            for (d, doc) in docs.iter().enumerate() {
                for (i, line) in doc.lines.iter().enumerate() {
                    let Some(raw) = line.label else {
                        return Err(Error::Data(format!(
                            "document {} line {i} has no ground-truth label",
                            doc.doc_id
                        )));
                    };
                    let level = raw.min(3);
                    let label = match task {
                        Task::Line => u32::from(raw > 0),
                        Task::Level => {
                            if raw == 0 {
                                continue;
                            }
                            level
                        }
                        Task::FourClass => level,
                        Task::Semantic => unreachable!(),
                    };
                    items.push(TaskItem {
                        doc_index: d,
                        line_index: i,
                        text: line.text.clone(),
                        label,
                    });
                }
            }
            Ok(TaskData {
                task,
                items,
                class_names: None,
            })
        }
        Task::Semantic => {
            for (d, doc) in docs.iter().enumerate() {
                let tree = detect_section_boundaries(doc, &oracle_headers(doc))?;
                for section in tree.sections() {
                    let Some(class) = map_header_to_class(&section.header.text, ont) else {
                        continue;
                    };
                    let label = ont
                        .class_index(class)
                        .expect("mapped class is in the ontology") as u32;
                    items.push(TaskItem {
                        doc_index: d,
                        line_index: section.header_line,
                        text: truncate_words(&section.text(doc), config.truncation),
                        label,
                    });
                }
            }
            Ok(TaskData {
                task,
                items,
                class_names: Some(ont.classes.clone()),
            })
        }
    }
}

/// Fit a feature pipeline on a training split: the header vocabulary from
/// training headers, the n-gram vectorizer from training item texts.
pub fn fit_pipeline(
    mode: VectorMode,
    docs: &[Document],
    train_items: &[&TaskItem],
    config: &FeatureConfig,
) -> Result<FeaturePipeline> {
    let headers: Vec<String> = train_items
        .iter()
        .filter(|it| {
            docs[it.doc_index].lines[it.line_index]
                .label
                .is_some_and(|l| l >= 1)
        })
        .map(|it| docs[it.doc_index].lines[it.line_index].text.clone())
        .collect();
    let vocab = build_header_vocabulary(&headers, config.vocab_min_frequency, &DEFAULT_STOPLIST);
    let vectorizer = if mode == VectorMode::Layout {
        None
    } else {
        let texts: Vec<String> = train_items.iter().map(|it| it.text.clone()).collect();
        Some(fit_ngram_vectorizer(
            &texts,
            config.ngram_min,
            config.ngram_max,
            config.min_df,
        ))
    };
    FeaturePipeline::new(mode, vocab, vectorizer)
}

/// Featurize one item under a fitted pipeline. Line-level tasks read the
/// line in its page context; the semantic task vectorizes the section text.
pub fn featurize_item(
    item: &TaskItem,
    docs: &[Document],
    pipeline: &FeaturePipeline,
    task: Task,
) -> Result<crate::featurize::FeatureVector> {
    match task {
        Task::Semantic => {
            let v = pipeline
                .vectorizer
                .as_ref()
                .ok_or_else(|| Error::Contract("semantic task requires a text vectorizer".into()))?;
            Ok(crate::featurize::FeatureVector::text_only(
                v.vectorize_text(&item.text),
            ))
        }
        _ => pipeline.header_feature(&docs[item.doc_index], item.line_index),
    }
}

/// Cross-validation output: per-fold reports plus the pooled report over
/// all held-out predictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub task: Task,
    pub mode: VectorMode,
    pub classifier: Classifier,
    pub folds: Vec<EvalReport>,
    pub pooled: EvalReport,
}

/// Balanced, stratified k-fold cross-validation of one (task, mode,
/// classifier) cell: classes are downsampled to parity, folds stratified,
/// and the vocabulary/vectorizer refit on each training split.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    task: Task,
    mode: VectorMode,
    classifier: Classifier,
    docs: &[Document],
    ont: &OntologyClassSet,
    config: &FeatureConfig,
    hyperparams: &Hyperparams,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let data = task_data(task, docs, ont, config)?;
    let ds = LabeledDataset::new(
        data.items
            .into_iter()
            .map(|it| {
                let label = it.label;
                (it, label)
            })
            .collect(),
    );
    let ds = balance_classes(ds, seed)?;
    let ds = make_stratified_folds(ds, k, seed)?;
    let assignments = ds.fold_assignments.clone().expect("folds just assigned");

    let mut truth_all = Vec::new();
    let mut predicted_all = Vec::new();
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let train_items: Vec<&TaskItem> = ds
            .records
            .iter()
            .zip(&assignments)
            .filter(|(_, a)| **a != fold)
            .map(|((it, _), _)| it)
            .collect();
        let test_items: Vec<&TaskItem> = ds
            .records
            .iter()
            .zip(&assignments)
            .filter(|(_, a)| **a == fold)
            .map(|((it, _), _)| it)
            .collect();
        let pipeline = fit_pipeline(mode, docs, &train_items, config)?;

        let train_records = train_items
            .iter()
            .map(|it| Ok((featurize_item(it, docs, &pipeline, task)?, it.label)))
            .collect::<Result<Vec<_>>>()?;
        let model = train(classifier, &LabeledDataset::new(train_records), hyperparams, seed)?;

        let mut truth = Vec::with_capacity(test_items.len());
        let mut predicted = Vec::with_capacity(test_items.len());
        for it in &test_items {
            let x = featurize_item(it, docs, &pipeline, task)?;
            truth.push(it.label);
            predicted.push(predict(&model, &x)?.label);
        }
        folds.push(evaluate_predictions(&truth, &predicted, &model.class_alphabet));
        truth_all.extend(truth);
        predicted_all.extend(predicted);
    }
    let alphabet = ds.class_alphabet.clone();
    Ok(CvReport {
        task,
        mode,
        classifier,
        folds,
        pooled: evaluate_predictions(&truth_all, &predicted_all, &alphabet),
    })
}

/// A trained model packaged with everything needed to apply it: the fitted
/// feature pipeline and, for the semantic task, the class-name table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedBundle {
    pub task: Task,
    pub classifier: Classifier,
    pub hyperparams: Hyperparams,
    pub pipeline: FeaturePipeline,
    pub model: Model,
    pub class_names: Option<Vec<String>>,
}

const BUNDLE_MAGIC: [u8; 4] = *b"DSBN";
const BUNDLE_VERSION: u8 = 1;

impl TrainedBundle {
    pub fn save(&self, sink: &mut dyn Write) -> Result<()> {
        write_magic_json(BUNDLE_MAGIC, BUNDLE_VERSION, self, sink)
    }

    pub fn load(source: &mut dyn Read) -> Result<TrainedBundle> {
        read_magic_json(BUNDLE_MAGIC, BUNDLE_VERSION, source)
    }

    pub fn save_to_path(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.save(&mut f)
    }

    pub fn load_from_path(path: &std::path::Path) -> Result<TrainedBundle> {
        let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        TrainedBundle::load(&mut f)
    }
}

/// Train one bundle on the full corpus (balanced, no held-out split).
#[allow(clippy::too_many_arguments)]
pub fn train_bundle(
    task: Task,
    mode: VectorMode,
    classifier: Classifier,
    docs: &[Document],
    ont: &OntologyClassSet,
    config: &FeatureConfig,
    hyperparams: &Hyperparams,
    seed: u64,
) -> Result<TrainedBundle> {
    let data = task_data(task, docs, ont, config)?;
    let class_names = data.class_names.clone();
    let ds = LabeledDataset::new(
        data.items
            .into_iter()
            .map(|it| {
                let label = it.label;
                (it, label)
            })
            .collect(),
    );
    let ds = balance_classes(ds, seed)?;
    let items: Vec<&TaskItem> = ds.records.iter().map(|(it, _)| it).collect();
    let pipeline = fit_pipeline(mode, docs, &items, config)?;
    let records = items
        .iter()
        .map(|it| Ok((featurize_item(it, docs, &pipeline, task)?, it.label)))
        .collect::<Result<Vec<_>>>()?;
    let model = train(classifier, &LabeledDataset::new(records), hyperparams, seed)?;
    Ok(TrainedBundle {
        task,
        classifier,
        hyperparams: hyperparams.clone(),
        pipeline,
        model,
        class_names,
    })
}

/// Evaluate a trained bundle on labeled documents.
pub fn evaluate_bundle(
    bundle: &TrainedBundle,
    docs: &[Document],
    ont: &OntologyClassSet,
    config: &FeatureConfig,
) -> Result<EvalReport> {
    let data = task_data(bundle.task, docs, ont, config)?;
    if data.items.is_empty() {
        return Err(Error::Data("no evaluable items in the corpus".into()));
    }
    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    for it in &data.items {
        let x = featurize_item(it, docs, &bundle.pipeline, bundle.task)?;
        truth.push(it.label);
        predicted.push(predict(&bundle.model, &x)?.label);
    }
    let mut alphabet = bundle.model.class_alphabet.clone();
    for l in &truth {
        if !alphabet.contains(l) {
            alphabet.push(*l);
        }
    }
    alphabet.sort_unstable();
    Ok(evaluate_predictions(&truth, &predicted, &alphabet))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate_corpus, CorpusSpec};

    fn small_corpus() -> Vec<Document> {
        generate_corpus(&CorpusSpec {
            n_docs: 8,
            seed: 7,
            ..CorpusSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn line_task_binary_labels() {
        let docs = small_corpus();
        let ont = OntologyClassSet::arxiv_default();
        let data = task_data(Task::Line, &docs, &ont, &FeatureConfig::default()).unwrap();
        assert!(data.items.iter().all(|it| it.label <= 1));
        let total_lines: usize = docs.iter().map(|d| d.lines.len()).sum();
        assert_eq!(data.items.len(), total_lines);
    }

    #[test]
    fn level_task_keeps_headers_only() {
        let docs = small_corpus();
        let ont = OntologyClassSet::arxiv_default();
        let data = task_data(Task::Level, &docs, &ont, &FeatureConfig::default()).unwrap();
        assert!(!data.items.is_empty());
        assert!(data.items.iter().all(|it| (1..=3).contains(&it.label)));
    }

    #[test]
    fn semantic_task_builds_section_texts() {
        let docs = small_corpus();
        let ont = OntologyClassSet::arxiv_default();
        let data = task_data(Task::Semantic, &docs, &ont, &FeatureConfig::default()).unwrap();
        assert!(!data.items.is_empty());
        assert!(data.items.iter().all(|it| !it.text.is_empty()));
        assert_eq!(data.class_names.as_ref().unwrap().len(), 20);
    }

    #[test]
    fn cross_validation_runs_and_scores_well() {
        let docs = small_corpus();
        let ont = OntologyClassSet::arxiv_default();
        let report = cross_validate(
            Task::Line,
            VectorMode::Combined,
            Classifier::DecisionTree,
            &docs,
            &ont,
            &FeatureConfig::default(),
            &Hyperparams::default(),
            3,
            11,
        )
        .unwrap();
        assert_eq!(report.folds.len(), 3);
        assert!(
            report.pooled.macro_f1 > 0.8,
            "macro F1 {}\n{}",
            report.pooled.macro_f1,
            report.pooled.to_text_table()
        );
    }

    #[test]
    fn bundle_round_trips_and_evaluates() {
        let docs = small_corpus();
        let ont = OntologyClassSet::arxiv_default();
        let bundle = train_bundle(
            Task::Line,
            VectorMode::Layout,
            Classifier::DecisionTree,
            &docs,
            &ont,
            &FeatureConfig::default(),
            &Hyperparams::default(),
            5,
        )
        .unwrap();
        let mut bytes = Vec::new();
        bundle.save(&mut bytes).unwrap();
        let restored = TrainedBundle::load(&mut bytes.as_slice()).unwrap();
        let a = evaluate_bundle(&bundle, &docs, &ont, &FeatureConfig::default()).unwrap();
        let b = evaluate_bundle(&restored, &docs, &ont, &FeatureConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.macro_f1 > 0.8, "{}", a.to_text_table());
    }
}
