//! Extractive summarization: PageRank over a sentence-similarity graph,
//! emitting the top-ranked sentences in their original order.

use crate::error::{Error, Result};
use crate::text::tokens_lower;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::LazyLock;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_RATIO: f64 = 0.2;

/// Sentence nodes with a symmetric similarity matrix and their rank scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceGraph {
    pub sentences: Vec<String>,
    /// Row-major n x n, symmetric, zero diagonal, non-negative.
    pub weights: Vec<Vec<f64>>,
    pub damping: f64,
    pub scores: Vec<f64>,
    pub converged: bool,
}

/// Shared-token similarity: |distinct shared tokens| / (ln|a| + ln|b|),
/// defined as 0 when either sentence has fewer than 2 tokens or there is
/// no overlap.
pub fn sentence_similarity(a: &[String], b: &[String]) -> f64 {
    if a.len() < 2 || b.len() < 2 {
        return 0.0;
    }
    let sa: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let sb: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let overlap = sa.intersection(&sb).count();
    if overlap == 0 {
        return 0.0;
    }
    overlap as f64 / ((a.len() as f64).ln() + (b.len() as f64).ln())
}

/// Weighted PageRank over the similarity matrix: iterate
/// score = (1-d)/n + d * W_normalized^T * score until the largest change
/// drops below `tol`. Rows with no outgoing weight distribute uniformly,
/// so scores always sum to 1; a single sentence scores exactly 1.
pub fn textrank_scores(
    weights: &[Vec<f64>],
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, bool)> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Contract("textrank needs at least one sentence".into()));
    }
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Contract(format!(
                "weight matrix is not square: row {i} has {} entries",
                row.len()
            )));
        }
    }
    let row_sums: Vec<f64> = weights.iter().map(|r| r.iter().sum()).collect();
    let nf = n as f64;
    let mut scores = vec![1.0 / nf; n];
    let mut converged = false;
    for _ in 0..max_iter {
        let mut next = vec![(1.0 - damping) / nf; n];
        for j in 0..n {
            if row_sums[j] > 0.0 {
                let contribution = damping * scores[j] / row_sums[j];
                for i in 0..n {
                    next[i] += contribution * weights[j][i];
                }
            } else {
                // Dangling node: spread its mass uniformly.
                let contribution = damping * scores[j] / nf;
                for v in next.iter_mut() {
                    *v += contribution;
                }
            }
        }
        let max_delta = scores
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        scores = next;
        if max_delta < tol {
            converged = true;
            break;
        }
    }
    Ok((scores, converged))
}

/// Build the graph for a list of sentences and rank them.
pub fn rank_sentences(sentences: &[String], damping: f64, tol: f64, max_iter: usize) -> Result<SentenceGraph> {
    let tokens: Vec<Vec<String>> = sentences.iter().map(|s| tokens_lower(s)).collect();
    let n = sentences.len();
    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = sentence_similarity(&tokens[i], &tokens[j]);
            weights[i][j] = w;
            weights[j][i] = w;
        }
    }
    let (scores, converged) = textrank_scores(&weights, damping, tol, max_iter)?;
    Ok(SentenceGraph {
        sentences: sentences.to_vec(),
        weights,
        damping,
        scores,
        converged,
    })
}

static SENTENCE_BOUNDARY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"([.!?]['\x22)]?)\s+(['\x22(]?[A-Z0-9])").expect("sentence boundary regex")
});

const ABBREVIATIONS: [&str; 16] = [
    "e.g.", "i.e.", "et al.", "etc.", "cf.", "vs.", "fig.", "eq.", "sec.", "dr.", "mr.", "mrs.",
    "ms.", "prof.", "no.", "vol.",
];

/// Split text into sentences: a period/question/exclamation mark followed by
/// whitespace and an uppercase start, unless the dot belongs to a known
/// abbreviation.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut search_from = 0usize;
    while let Some(caps) = SENTENCE_BOUNDARY.captures_at(text, search_from) {
        let punct = caps.get(1).expect("group 1").start();
        let next_start = caps.get(2).expect("group 2").start();
        let candidate = &text[start..=punct];
        let lower = candidate.trim_end().to_lowercase();
        if ABBREVIATIONS.iter().any(|a| lower.ends_with(a)) {
            search_from = punct + 1;
            continue;
        }
        let sentence = text[start..next_start].trim();
        if !sentence.is_empty() {
            out.push(sentence.to_string());
        }
        start = next_start;
        search_from = next_start;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

/// Extractive summary: the ceil(ratio * n) top-scoring sentences, emitted
/// in original order. Ties prefer the earlier sentence. Nonempty input
/// always yields at least one sentence.
pub fn summarize_section(text: &str, ratio: f64) -> Result<String> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Contract(format!(
            "summary ratio must be in (0, 1], got {ratio}"
        )));
    }
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        return Ok(String::new());
    }
    let keep = ((ratio * sentences.len() as f64).ceil() as usize).clamp(1, sentences.len());
    let graph = rank_sentences(&sentences, DEFAULT_DAMPING, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.sort_by(|a, b| graph.scores[*b].total_cmp(&graph.scores[*a]).then(a.cmp(b)));
    let mut selected: Vec<usize> = order.into_iter().take(keep).collect();
    selected.sort_unstable();
    Ok(selected
        .into_iter()
        .map(|i| sentences[i].as_str())
        .collect::<Vec<_>>()
        .join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn identical_four_token_sentences() {
        let s = toks(&["graph", "based", "ranking", "model"]);
        let got = sentence_similarity(&s, &s);
        let want = 4.0 / (2.0 * 4.0f64.ln());
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn disjoint_sentences_score_zero() {
        let a = toks(&["alpha", "beta", "gamma"]);
        let b = toks(&["delta", "epsilon", "zeta"]);
        assert_eq!(sentence_similarity(&a, &b), 0.0);
    }

    #[test]
    fn short_sentences_score_zero() {
        let a = toks(&["word"]);
        let b = toks(&["word", "again"]);
        assert_eq!(sentence_similarity(&a, &b), 0.0);
    }

    #[test]
    fn single_sentence_scores_one() {
        let (scores, converged) = textrank_scores(&[vec![0.0]], 0.85, 1e-6, 100).unwrap();
        assert!(converged);
        assert!((scores[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_three_cycle_equal_scores() {
        let w = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        let (scores, _) = textrank_scores(&w, 0.85, 1e-9, 200).unwrap();
        assert!((scores[0] - scores[1]).abs() < 1e-9);
        assert!((scores[1] - scores[2]).abs() < 1e-9);
        let total: f64 = scores.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    /// Independent oracle: dense power iteration on the explicitly
    /// normalized transition matrix (dangling rows replaced by uniform).
    fn oracle_pagerank(weights: &[Vec<f64>], damping: f64, iters: usize) -> Vec<f64> {
        let n = weights.len();
        let nf = n as f64;
        let mut matrix = vec![vec![0.0f64; n]; n];
        for j in 0..n {
            let row_sum: f64 = weights[j].iter().sum();
            for i in 0..n {
                matrix[j][i] = if row_sum > 0.0 {
                    weights[j][i] / row_sum
                } else {
                    1.0 / nf
                };
            }
        }
        let mut v = vec![1.0 / nf; n];
        for _ in 0..iters {
            let mut next = vec![0.0f64; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += matrix[j][i] * v[j];
                }
                next[i] = (1.0 - damping) / nf + damping * acc;
            }
            v = next;
        }
        v
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn scores_match_dense_power_iteration_oracle() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..10 {
            let n = rng.random_range(1..12);
            let mut w = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.6) {
                        let v: f64 = rng.random_range(0.1..2.0);
                        w[i][j] = v;
                        w[j][i] = v;
                    }
                }
            }
            let (scores, _) = textrank_scores(&w, 0.85, 1e-12, 500).unwrap();
            let want = oracle_pagerank(&w, 0.85, 500);
            for (a, b) in scores.iter().zip(&want) {
                assert!((a - b).abs() < 1e-6, "trial {trial}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ten_sentences_ratio_point_two_keeps_two() {
        let text: String = (0..10)
            .map(|i| format!("Sentence number {i} talks about ranking models and graphs. "))
            .collect();
        let summary = summarize_section(&text, 0.2).unwrap();
        assert_eq!(split_sentences(&summary).len(), 2);
    }

    #[test]
    fn ratio_one_returns_everything_in_order() {
        let text = "First things first. Second point follows. Third wraps up.";
        let summary = summarize_section(text, 1.0).unwrap();
        assert_eq!(summary, text);
    }

    #[test]
    fn three_sentences_low_ratio_keeps_one() {
        let text = "Alpha starts here. Beta continues the thought. Gamma concludes.";
        let summary = summarize_section(text, 0.2).unwrap();
        assert_eq!(split_sentences(&summary).len(), 1);
    }

    #[test]
    fn empty_input_gives_empty_summary() {
        assert_eq!(summarize_section("", 0.2).unwrap(), "");
        assert_eq!(summarize_section("   ", 0.5).unwrap(), "");
    }

    #[test]
    fn abbreviations_do_not_split() {
        let text = "We follow the method of Smith et al. And co. in spirit, e.g. The one from Fig. 3. A second sentence arrives here.";
        let sentences = split_sentences(text);
        assert!(
            sentences[0].contains("et al. And"),
            "abbreviation split: {sentences:?}"
        );
    }

    #[test]
    fn splitter_handles_questions_and_quotes() {
        let text = "Is this a question? Yes. \"Quoted end.\" Next starts.";
        let sentences = split_sentences(text);
        assert_eq!(sentences.len(), 4, "{sentences:?}");
    }

    proptest! {
        /// Similarity is symmetric.
        #[test]
        fn similarity_symmetric(a in proptest::collection::vec("[a-e]{1,4}", 0..8),
                                b in proptest::collection::vec("[a-e]{1,4}", 0..8)) {
            let a: Vec<String> = a;
            let b: Vec<String> = b;
            prop_assert_eq!(sentence_similarity(&a, &b), sentence_similarity(&b, &a));
        }

        /// Summary sentences are a subset of the input, in input order.
        #[test]
        fn summary_is_ordered_subset(n in 1usize..9, ratio in 0.05f64..1.0) {
            let sentences: Vec<String> = (0..n)
                .map(|i| format!("Sentence {i} shares ranking words with sentence {}.", (i + 1) % n))
                .collect();
            let text = sentences.join(" ");
            let summary = summarize_section(&text, ratio).unwrap();
            let out = split_sentences(&summary);
            let expect = ((ratio * n as f64).ceil() as usize).clamp(1, n);
            prop_assert_eq!(out.len(), expect);
            let mut last = None;
            for s in &out {
                let pos = sentences.iter().position(|orig| orig.trim_end_matches('.') == s.trim_end_matches('.'));
                prop_assert!(pos.is_some(), "summary sentence not from input: {}", s);
                if let Some(prev) = last {
                    prop_assert!(pos.unwrap() > prev, "order violated");
                }
                last = pos;
            }
        }

        /// Scores are invariant under uniform scaling of all weights.
        #[test]
        fn scores_scale_invariant(scale in 0.1f64..10.0) {
            let w = vec![
                vec![0.0, 0.8, 0.1],
                vec![0.8, 0.0, 0.4],
                vec![0.1, 0.4, 0.0],
            ];
            let scaled: Vec<Vec<f64>> = w
                .iter()
                .map(|row| row.iter().map(|v| v * scale).collect())
                .collect();
            let (a, _) = textrank_scores(&w, 0.85, 1e-12, 500).unwrap();
            let (b, _) = textrank_scores(&scaled, 0.85, 1e-12, 500).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
