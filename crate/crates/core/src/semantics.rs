//! Semantic structure: ontology classes for sections, header-to-class
//! mapping, a learned text classifier over sections, a first-order sequence
//! model over class orderings, and annotation-triple output.

use crate::error::{Error, Result};
use crate::featurize::{FeatureVector, NgramVectorizer};
use crate::ingest::Document;
use crate::learn::{predict, Model};
use crate::structure::{SectionNode, TocTree};
use crate::text::normalize_header;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Class emitted for sections that nothing could label.
pub const UNKNOWN_CLASS: &str = "UnknownSection";

/// The ontology: ordered class names and a normalized-phrase alias map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyClassSet {
    pub classes: Vec<String>,
    /// Normalized header phrase -> class name.
    pub alias_map: BTreeMap<String, String>,
}

/// The 20 scholarly-article classes.
pub const ARXIV_CLASSES: [&str; 20] = [
    "Introduction",
    "Conclusion",
    "Discussion",
    "References",
    "Acknowledgments",
    "Results",
    "Abstract",
    "Appendix",
    "RelatedWork",
    "Experiments",
    "Methodology",
    "Preliminary",
    "ProofOfTheorem",
    "Evaluation",
    "FutureWork",
    "Datasets",
    "Contribution",
    "Background",
    "Implementation",
    "Approach",
];

const DEFAULT_ALIASES: [(&str, &str); 67] = [
    ("introduction", "Introduction"),
    ("motivation", "Introduction"),
    ("overview", "Introduction"),
    ("conclusion", "Conclusion"),
    ("conclusions", "Conclusion"),
    ("concluding remarks", "Conclusion"),
    ("summary and conclusions", "Conclusion"),
    ("final remarks", "Conclusion"),
    ("discussion", "Discussion"),
    ("discussions", "Discussion"),
    ("references", "References"),
    ("bibliography", "References"),
    ("acknowledgments", "Acknowledgments"),
    ("acknowledgements", "Acknowledgments"),
    ("acknowledgment", "Acknowledgments"),
    ("acknowledgement", "Acknowledgments"),
    ("results", "Results"),
    ("main results", "Results"),
    ("numerical results", "Results"),
    ("experimental results", "Results"),
    ("observations", "Results"),
    ("abstract", "Abstract"),
    ("appendix", "Appendix"),
    ("appendices", "Appendix"),
    ("supplementary material", "Appendix"),
    ("related work", "RelatedWork"),
    ("related works", "RelatedWork"),
    ("previous work", "RelatedWork"),
    ("prior work", "RelatedWork"),
    ("literature review", "RelatedWork"),
    ("state of the art", "RelatedWork"),
    ("experiments", "Experiments"),
    ("experiment", "Experiments"),
    ("experimental setup", "Experiments"),
    ("experiments and evaluation", "Experiments"),
    ("methodology", "Methodology"),
    ("methods", "Methodology"),
    ("method", "Methodology"),
    ("materials and methods", "Methodology"),
    ("preliminary", "Preliminary"),
    ("preliminaries", "Preliminary"),
    ("notation", "Preliminary"),
    ("definitions", "Preliminary"),
    ("notation and preliminaries", "Preliminary"),
    ("proof", "ProofOfTheorem"),
    ("proofs", "ProofOfTheorem"),
    ("proof of theorem", "ProofOfTheorem"),
    ("proof of the main theorem", "ProofOfTheorem"),
    ("evaluation", "Evaluation"),
    ("performance evaluation", "Evaluation"),
    ("performance analysis", "Evaluation"),
    ("future work", "FutureWork"),
    ("future directions", "FutureWork"),
    ("outlook", "FutureWork"),
    ("limitation and future work", "FutureWork"),
    ("datasets", "Datasets"),
    ("dataset", "Datasets"),
    ("data collection", "Datasets"),
    ("data description", "Datasets"),
    ("contribution", "Contribution"),
    ("contributions", "Contribution"),
    ("our contributions", "Contribution"),
    ("background", "Background"),
    ("implementation", "Implementation"),
    ("implementation details", "Implementation"),
    ("approach", "Approach"),
    ("technical approach", "Approach"),
];

impl OntologyClassSet {
    /// The scholarly-article ontology with its default alias map.
    pub fn arxiv_default() -> Self {
        let set = OntologyClassSet {
            classes: ARXIV_CLASSES.iter().map(|c| c.to_string()).collect(),
            alias_map: DEFAULT_ALIASES
                .iter()
                .map(|(a, c)| (a.to_string(), c.to_string()))
                .collect(),
        };
        set.validate().expect("default ontology is valid");
        set
    }

    pub fn validate(&self) -> Result<()> {
        let unique: BTreeSet<&String> = self.classes.iter().collect();
        if unique.len() != self.classes.len() {
            return Err(Error::Schema("ontology class names must be unique".into()));
        }
        for (alias, class) in &self.alias_map {
            if !self.classes.contains(class) {
                return Err(Error::Schema(format!(
                    "alias {alias:?} maps to unknown class {class:?}"
                )));
            }
        }
        Ok(())
    }

    /// Classes that have at least one alias.
    pub fn covered_classes(&self) -> BTreeSet<&str> {
        self.alias_map.values().map(String::as_str).collect()
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }
}

/// Normalize headers, count them, and rank by count (descending, then
/// lexicographic). The raw material for alias discovery.
pub fn discover_classes_count_based(headers: &[String]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for h in headers {
        let norm = normalize_header(h);
        if norm.is_empty() {
            continue;
        }
        *counts.entry(norm).or_insert(0) += 1;
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Map a header onto an ontology class: exact alias match on the normalized
/// form, then substring containment (longest alias wins), then token overlap
/// of at least half the smaller token set.
pub fn map_header_to_class<'a>(header: &str, ont: &'a OntologyClassSet) -> Option<&'a str> {
    let norm = normalize_header(header);
    if norm.is_empty() {
        return None;
    }
    if let Some(class) = ont.alias_map.get(&norm) {
        return Some(class);
    }

    let mut best_substring: Option<(&str, &str)> = None; // (alias, class)
    for (alias, class) in &ont.alias_map {
        if norm.contains(alias.as_str()) || alias.contains(&norm) {
            let better = match best_substring {
                Some((cur, _)) => alias.len() > cur.len(),
                None => true,
            };
            if better {
                best_substring = Some((alias, class));
            }
        }
    }
    if let Some((_, class)) = best_substring {
        return Some(class);
    }

    let header_tokens: BTreeSet<&str> = norm.split(' ').collect();
    let mut best_overlap: Option<(f64, &str, &str)> = None;
    for (alias, class) in &ont.alias_map {
        let alias_tokens: BTreeSet<&str> = alias.split(' ').collect();
        let inter = header_tokens.intersection(&alias_tokens).count();
        let denom = header_tokens.len().min(alias_tokens.len());
        if denom == 0 {
            continue;
        }
        let overlap = inter as f64 / denom as f64;
        if overlap >= 0.5 {
            let better = match &best_overlap {
                Some((cur, _, _)) => overlap > *cur,
                None => true,
            };
            if better {
                best_overlap = Some((overlap, alias, class));
            }
        }
    }
    best_overlap.map(|(_, _, class)| class)
}

// ---------------------------------------------------------------------------
// Learned semantic classifier

/// A trained 20-class text classifier over section contents, bundled with
/// its vectorizer and the class-name table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemanticClassifier {
    pub model: Model,
    pub vectorizer: NgramVectorizer,
    /// Model label -> ontology class name.
    pub class_names: Vec<String>,
    /// Words of section text considered, from the front.
    pub truncation: usize,
}

/// Default truncation: the first two hundred words of a section.
pub const DEFAULT_TRUNCATION: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticDecision {
    pub class: String,
    /// Per-class scores in model alphabet order; empty when the alias
    /// fallback produced the decision.
    pub scores: Vec<f64>,
    pub via_alias: bool,
}

/// Truncate to the first `n` whitespace words.
pub fn truncate_words(text: &str, n: usize) -> String {
    text.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

/// Classify one section. Only the first `truncation` words of header+body
/// are used. When the text vectorizes to nothing (or is empty), falls back
/// to the alias map on the header; `None` means even that failed.
pub fn classify_section_semantic(
    section: &SectionNode,
    doc: &Document,
    clf: &SemanticClassifier,
    ont: &OntologyClassSet,
) -> Result<Option<SemanticDecision>> {
    let text = truncate_words(&section.text(doc), clf.truncation);
    classify_text_semantic(&text, &section.header.text, clf, ont)
}

/// Text-level variant used for training-time evaluation as well.
pub fn classify_text_semantic(
    text: &str,
    header: &str,
    clf: &SemanticClassifier,
    ont: &OntologyClassSet,
) -> Result<Option<SemanticDecision>> {
    let truncated = truncate_words(text, clf.truncation);
    let vector = clf.vectorizer.vectorize_text(&truncated);
    if vector.entries.is_empty() {
        return Ok(map_header_to_class(header, ont).map(|class| SemanticDecision {
            class: class.to_string(),
            scores: Vec::new(),
            via_alias: true,
        }));
    }
    let pred = predict(&clf.model, &FeatureVector::text_only(vector))?;
    let class = clf
        .class_names
        .get(pred.label as usize)
        .ok_or_else(|| {
            Error::Schema(format!(
                "semantic model label {} has no class name",
                pred.label
            ))
        })?
        .clone();
    Ok(Some(SemanticDecision {
        class,
        scores: pred.scores,
        via_alias: false,
    }))
}

/// Assign `ontology_class` to every section of the tree: the alias map
/// first, the learned classifier (when given) for headers the aliases miss.
pub fn assign_ontology_classes(
    tree: &mut TocTree,
    doc: &Document,
    ont: &OntologyClassSet,
    clf: Option<&SemanticClassifier>,
) -> Result<()> {
    let mut failure: Option<Error> = None;
    tree.for_each_section_mut(&mut |section| {
        if failure.is_some() {
            return;
        }
        let by_alias = map_header_to_class(&section.header.text, ont).map(str::to_string);
        section.ontology_class = match (by_alias, clf) {
            (Some(class), _) => Some(class),
            (None, Some(clf)) => match classify_section_semantic(section, doc, clf, ont) {
                Ok(decision) => decision.map(|d| d.class),
                Err(e) => {
                    failure = Some(e);
                    None
                }
            },
            (None, None) => None,
        };
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Section sequence model

/// First-order Markov model over class sequences with add-one smoothing.
/// Sources are START plus each class; targets are each class plus END.
/// Sequences longer than `max_length` are truncated before counting; the
/// PAD marker exists in the alphabet but never carries counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceModel {
    pub labels: Vec<String>,
    pub max_length: usize,
    /// Rows: START, then each class. Columns: each class, then END.
    pub transition_counts: Vec<Vec<u64>>,
    /// Smoothed log-probabilities, same shape as the counts.
    pub transition_log_probs: Vec<Vec<f64>>,
}

pub const START_MARKER: &str = "<start>";
pub const END_MARKER: &str = "<end>";
pub const PAD_MARKER: &str = "<pad>";

pub const DEFAULT_MAX_SEQUENCE: usize = 15;

impl SequenceModel {
    /// The full alphabet: classes plus the start/end/pad markers.
    pub fn label_alphabet(&self) -> Vec<String> {
        let mut out = self.labels.clone();
        out.push(START_MARKER.into());
        out.push(END_MARKER.into());
        out.push(PAD_MARKER.into());
        out
    }

    fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Contract(format!("label {label:?} not in sequence alphabet")))
    }

    /// ln P(sequence), including the START and END transitions.
    pub fn score_sequence(&self, seq: &[String]) -> Result<f64> {
        let k = self.labels.len();
        let mut prev_row = 0usize; // START
        let mut score = 0.0;
        for label in seq.iter().take(self.max_length) {
            let idx = self.label_index(label)?;
            score += self.transition_log_probs[prev_row][idx];
            prev_row = idx + 1;
        }
        score += self.transition_log_probs[prev_row][k]; // END column
        Ok(score)
    }

    /// The permutation of `labels` with the highest sequence score:
    /// exhaustive for up to 8 labels, greedy insertion beyond. Ties resolve
    /// to the lexicographically first index sequence.
    pub fn canonical_order(&self, labels: &[String]) -> Result<Vec<String>> {
        let mut indices: Vec<usize> = labels
            .iter()
            .map(|l| self.label_index(l))
            .collect::<Result<_>>()?;
        indices.sort_unstable();
        if indices.is_empty() {
            return Ok(Vec::new());
        }
        let best = if indices.len() <= 8 {
            self.best_permutation_exhaustive(indices)
        } else {
            self.best_order_greedy(indices)
        };
        Ok(best.into_iter().map(|i| self.labels[i].clone()).collect())
    }

    fn score_indices(&self, seq: &[usize]) -> f64 {
        let k = self.labels.len();
        let mut prev_row = 0usize;
        let mut score = 0.0;
        for &idx in seq.iter().take(self.max_length) {
            score += self.transition_log_probs[prev_row][idx];
            prev_row = idx + 1;
        }
        score + self.transition_log_probs[prev_row][k]
    }

    /// Scan distinct permutations in lexicographic order, keeping the first
    /// maximum (strict improvement only).
    fn best_permutation_exhaustive(&self, mut indices: Vec<usize>) -> Vec<usize> {
        let mut best = indices.clone();
        let mut best_score = self.score_indices(&indices);
        while next_permutation(&mut indices) {
            let s = self.score_indices(&indices);
            if s > best_score {
                best_score = s;
                best = indices.clone();
            }
        }
        best
    }

    /// Insert each label (ascending) at the position that maximizes the
    /// running score; first-best position wins ties.
    fn best_order_greedy(&self, indices: Vec<usize>) -> Vec<usize> {
        let mut order: Vec<usize> = Vec::with_capacity(indices.len());
        for idx in indices {
            let mut best_pos = 0;
            let mut best_score = f64::NEG_INFINITY;
            for pos in 0..=order.len() {
                let mut candidate = order.clone();
                candidate.insert(pos, idx);
                let s = self.score_indices(&candidate);
                if s > best_score {
                    best_score = s;
                    best_pos = pos;
                }
            }
            order.insert(best_pos, idx);
        }
        order
    }
}

/// Lexicographic next-permutation over a slice; returns false after the
/// last permutation. Handles repeated values (distinct permutations only).
fn next_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

/// Fit the sequence model: first-order transition counts with add-one
/// smoothing over `corpus`, each sequence truncated to `max_length`.
pub fn fit_sequence_model(
    labels: Vec<String>,
    corpus: &[Vec<String>],
    max_length: usize,
) -> Result<SequenceModel> {
    if max_length == 0 {
        return Err(Error::Contract("max_length must be at least 1".into()));
    }
    let k = labels.len();
    let mut counts = vec![vec![0u64; k + 1]; k + 1];
    let index_of = |label: &String| -> Result<usize> {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Contract(format!("label {label:?} not in sequence alphabet")))
    };
    for seq in corpus {
        let mut prev_row = 0usize; // START
        for label in seq.iter().take(max_length) {
            let idx = index_of(label)?;
            counts[prev_row][idx] += 1;
            prev_row = idx + 1;
        }
        counts[prev_row][k] += 1; // END
    }
    let log_probs = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            let denom = (total + row.len() as u64) as f64;
            row.iter()
                .map(|c| (((c + 1) as f64) / denom).ln())
                .collect()
        })
        .collect();
    Ok(SequenceModel {
        labels,
        max_length,
        transition_counts: counts,
        transition_log_probs: log_probs,
    })
}

// ---------------------------------------------------------------------------
// Ontology annotation output

/// One line of the annotation output.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    /// Literal objects are quoted instead of angle-bracketed.
    pub literal: bool,
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.literal {
            write!(
                f,
                "<{}> <{}> \"{}\" .",
                self.subject,
                self.predicate,
                self.object.replace('\\', "\\\\").replace('"', "\\\"")
            )
        } else {
            write!(f, "<{}> <{}> <{}> .", self.subject, self.predicate, self.object)
        }
    }
}

fn identifier(raw: &str) -> String {
    raw.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Emit the annotation triples for a tree: the document node, one type and
/// one hasSection triple per section, hasConcept triples for attached
/// concepts, and followedBy links between consecutive sections. Sections
/// without a class become `UnknownSection`.
pub fn emit_ontology_annotation(tree: &TocTree, ont: &OntologyClassSet) -> Vec<Triple> {
    let doc_node = format!("doc:{}", identifier(&tree.doc_id));
    let mut triples = vec![Triple {
        subject: doc_node.clone(),
        predicate: "rdf:type".into(),
        object: "ont:Document".into(),
        literal: false,
    }];
    let sections = tree.sections();
    let mut prev: Option<String> = None;
    for (i, section) in sections.iter().enumerate() {
        let node = format!("{doc_node}/sec-{i}");
        let class = section
            .ontology_class
            .clone()
            .filter(|c| ont.classes.contains(c) || c == UNKNOWN_CLASS)
            .unwrap_or_else(|| UNKNOWN_CLASS.to_string());
        triples.push(Triple {
            subject: doc_node.clone(),
            predicate: "ont:hasSection".into(),
            object: node.clone(),
            literal: false,
        });
        triples.push(Triple {
            subject: node.clone(),
            predicate: "rdf:type".into(),
            object: format!("ont:{class}"),
            literal: false,
        });
        for concept in section.concepts.iter().flatten() {
            triples.push(Triple {
                subject: node.clone(),
                predicate: "ont:hasConcept".into(),
                object: concept.clone(),
                literal: true,
            });
        }
        if let Some(prev_node) = prev {
            triples.push(Triple {
                subject: prev_node,
                predicate: "ont:followedBy".into(),
                object: node.clone(),
                literal: false,
            });
        }
        prev = Some(node);
    }
    triples
}

/// Render triples one per line.
pub fn triples_to_text(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
