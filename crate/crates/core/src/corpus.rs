//! Corpus construction: bookmark annotations to per-line labels, stratified
//! cross-validation folds, and class balancing.

use crate::error::{Error, Result};
use crate::ingest::Document;
use crate::text::header_similarity;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Records paired with integer labels, plus the ordered label alphabet and
/// optional cross-validation fold assignments.
#[derive(Debug, Clone)]
pub struct LabeledDataset<R> {
    pub records: Vec<(R, u32)>,
    pub class_alphabet: Vec<u32>,
    pub fold_assignments: Option<Vec<usize>>,
}

impl<R> LabeledDataset<R> {
    /// Build a dataset from records; the class alphabet is the ascending set
    /// of labels present.
    pub fn new(records: Vec<(R, u32)>) -> Self {
        let mut alphabet: Vec<u32> = records.iter().map(|(_, l)| *l).collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        LabeledDataset {
            records,
            class_alphabet: alphabet,
            fold_assignments: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Per-class record counts, in class-alphabet order.
    pub fn class_counts(&self) -> Vec<usize> {
        self.class_alphabet
            .iter()
            .map(|c| self.records.iter().filter(|(_, l)| l == c).count())
            .collect()
    }

    /// Split off fold `k` as a test set, the rest as training.
    pub fn split_fold(&self, fold: usize) -> (LabeledDataset<R>, LabeledDataset<R>)
    where
        R: Clone,
    {
        let assignments = self
            .fold_assignments
            .as_ref()
            .expect("split_fold requires fold assignments");
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, rec) in self.records.iter().enumerate() {
            if assignments[i] == fold {
                test.push(rec.clone());
            } else {
                train.push(rec.clone());
            }
        }
        (
            LabeledDataset {
                records: train,
                class_alphabet: self.class_alphabet.clone(),
                fold_assignments: None,
            },
            LabeledDataset {
                records: test,
                class_alphabet: self.class_alphabet.clone(),
                fold_assignments: None,
            },
        )
    }
}

/// TOC entries that found no line, reported alongside the labeling.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LabelDiagnostics {
    pub unmatched_entries: Vec<UnmatchedEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnmatchedEntry {
    pub title: String,
    pub depth: u32,
    pub order: u32,
    pub best_score: f64,
}

/// Label document lines from its TOC bookmarks.
///
/// Candidate (entry, line) pairs whose normalized similarity reaches the
/// threshold are assigned greedily, best score first; each entry labels at
/// most one line and each line takes at most one entry. Ties are resolved in
/// document order (entry order, then line position). Matched lines get
/// `label = depth`; every other line gets label 0. Entries left unmatched are
/// reported in the diagnostics, never as an error.
pub fn map_bookmarks_to_labels(
    doc: &mut Document,
    similarity_threshold: f64,
) -> Result<LabelDiagnostics> {
    if !(similarity_threshold > 0.0 && similarity_threshold <= 1.0) {
        return Err(Error::Contract(format!(
            "similarity threshold must be in (0, 1], got {similarity_threshold}"
        )));
    }
    let toc = doc
        .toc
        .clone()
        .ok_or_else(|| Error::Contract("map_bookmarks_to_labels requires doc.toc".into()))?;

    let mut entries: Vec<&crate::ingest::BookmarkEntry> = toc.iter().collect();
    entries.sort_by_key(|e| e.order);

    // All candidate pairs at or above the threshold, best score first;
    // ties in document order.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut best_scores = vec![0.0f64; entries.len()];
    for (ei, entry) in entries.iter().enumerate() {
        for (li, line) in doc.lines.iter().enumerate() {
            let score = header_similarity(&entry.title, &line.text);
            if score > best_scores[ei] {
                best_scores[ei] = score;
            }
            if score >= similarity_threshold {
                candidates.push((score, ei, li));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut entry_line: Vec<Option<usize>> = vec![None; entries.len()];
    let mut line_taken = vec![false; doc.lines.len()];
    for (_, ei, li) in candidates {
        if entry_line[ei].is_none() && !line_taken[li] {
            entry_line[ei] = Some(li);
            line_taken[li] = true;
        }
    }

    for line in &mut doc.lines {
        line.label = Some(0);
    }
    let mut diagnostics = LabelDiagnostics::default();
    for (ei, entry) in entries.iter().enumerate() {
        match entry_line[ei] {
            Some(li) => doc.lines[li].label = Some(entry.depth),
            None => diagnostics.unmatched_entries.push(UnmatchedEntry {
                title: entry.title.clone(),
                depth: entry.depth,
                order: entry.order,
                best_score: best_scores[ei],
            }),
        }
    }
    Ok(diagnostics)
}

/// Assign each record to one of `k` folds so that per-class counts differ by
/// at most one across folds. Deterministic for a fixed seed.
pub fn make_stratified_folds<R>(
    mut ds: LabeledDataset<R>,
    k: usize,
    seed: u64,
) -> Result<LabeledDataset<R>> {
    if k < 2 {
        return Err(Error::Contract(format!("k must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![usize::MAX; ds.records.len()];
    for class in ds.class_alphabet.clone() {
        let mut indices: Vec<usize> = ds
            .records
            .iter()
            .enumerate()
            .filter(|(_, (_, l))| *l == class)
            .map(|(i, _)| i)
            .collect();
        if indices.len() < k {
            return Err(Error::Data(format!(
                "class {class} has {} members, fewer than k = {k}",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        for (pos, idx) in indices.into_iter().enumerate() {
            assignments[idx] = pos % k;
        }
    }
    debug_assert!(assignments.iter().all(|&a| a != usize::MAX));
    ds.fold_assignments = Some(assignments);
    Ok(ds)
}

/// Downsample every class, without replacement, to the minority-class count.
/// Record order is preserved. Deterministic for a fixed seed.
pub fn balance_classes<R>(ds: LabeledDataset<R>, seed: u64) -> Result<LabeledDataset<R>> {
    if ds.is_empty() {
        return Err(Error::Contract("balance_classes requires records".into()));
    }
    let min_count = ds
        .class_counts()
        .into_iter()
        .min()
        .expect("nonempty dataset has counts");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; ds.records.len()];
    for class in &ds.class_alphabet {
        let mut indices: Vec<usize> = ds
            .records
            .iter()
            .enumerate()
            .filter(|(_, (_, l))| l == class)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(&mut rng);
        indices.truncate(min_count);
        for idx in indices {
            keep[idx] = true;
        }
    }
    let records = ds
        .records
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(r, _)| r)
        .collect();
    Ok(LabeledDataset {
        records,
        class_alphabet: ds.class_alphabet,
        fold_assignments: None,
    })
}
