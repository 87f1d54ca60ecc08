//! Feature extraction: the 16 layout features computed per line, the header
//! vocabulary, and sparse TF-IDF n-gram text vectors.

use crate::error::{Error, Result};
use crate::ingest::{LineRecord, PageStats};
use crate::text::{numbering_depth, strip_leading_numbering, tokens_lower, words};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::LazyLock;

/// Names of the 16 layout features, in vector order.
pub const LAYOUT_FEATURE_NAMES: [&str; 16] = [
    "pos_nnp",
    "without_verb_higher_line_space",
    "font_weight",
    "bold_italic",
    "at_least_3_lines_upper",
    "higher_line_space",
    "number_dot",
    "text_len_group",
    "seq_number",
    "colon",
    "header_0",
    "header_1",
    "header_2",
    "title_case",
    "all_upper",
    "voc",
];

pub const LAYOUT_DIM: usize = 16;

/// A sparse vector with an explicit dimensionality; entries are sorted by
/// index and strictly increasing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVec {
    pub dim: usize,
    pub entries: Vec<(u32, f64)>,
}

impl SparseVec {
    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }
}

/// A line's feature vector: one or both of the 16-entry layout block and a
/// sparse TF-IDF text block. Text coordinates follow the layout block when
/// both are present (the three vector modes: layout, text, combined).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub layout: Option<[f64; LAYOUT_DIM]>,
    pub text: Option<SparseVec>,
}

impl FeatureVector {
    pub fn layout_only(layout: [f64; LAYOUT_DIM]) -> Self {
        FeatureVector {
            layout: Some(layout),
            text: None,
        }
    }

    pub fn text_only(text: SparseVec) -> Self {
        FeatureVector {
            layout: None,
            text: Some(text),
        }
    }

    /// Total dimensionality: 16 for the layout block when present, plus the
    /// text block dimensionality when attached.
    pub fn dimension(&self) -> usize {
        self.layout.map_or(0, |_| LAYOUT_DIM) + self.text.as_ref().map_or(0, |t| t.dim)
    }

    fn text_offset(&self) -> u32 {
        self.layout.map_or(0, |_| LAYOUT_DIM as u32)
    }

    /// Iterate `(index, value)` over nonzero coordinates of the combined
    /// vector.
    pub fn nonzero(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        let layout = self
            .layout
            .iter()
            .flat_map(|l| l.iter().enumerate())
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v));
        let offset = self.text_offset();
        let text = self
            .text
            .iter()
            .flat_map(|t| t.entries.iter())
            .map(move |(i, v)| (i + offset, *v));
        layout.chain(text)
    }

    /// Value at a combined-vector coordinate.
    pub fn value_at(&self, index: u32) -> f64 {
        if let Some(layout) = &self.layout {
            if (index as usize) < LAYOUT_DIM {
                return layout[index as usize];
            }
        }
        self.text
            .as_ref()
            .map_or(0.0, |t| t.get(index - self.text_offset()))
    }

    pub fn has_nan(&self) -> bool {
        self.layout.iter().flatten().any(|v| v.is_nan())
            || self
                .text
                .as_ref()
                .is_some_and(|t| t.entries.iter().any(|(_, v)| v.is_nan()))
    }
}

/// Attach a text block to a layout vector. The layout block is preserved
/// bit-exactly; total dimensionality becomes 16 + |vocabulary|.
pub fn combine(layout: FeatureVector, text: SparseVec) -> FeatureVector {
    FeatureVector {
        layout: layout.layout,
        text: Some(text),
    }
}

// ---------------------------------------------------------------------------
// Header vocabulary

pub static DEFAULT_STOPLIST: LazyLock<BTreeSet<String>> = LazyLock::new(|| {
    include_str!("../assets/stoplist.txt")
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
});

/// Load a word-per-line stoplist file.
pub fn load_stoplist(path: &Path) -> Result<BTreeSet<String>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(body
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

/// Words that recur across section headers, minus common English words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderVocabulary {
    pub terms: BTreeSet<String>,
    pub min_frequency: usize,
    pub stoplist: BTreeSet<String>,
}

impl HeaderVocabulary {
    pub fn contains(&self, token: &str) -> bool {
        self.terms.contains(&token.to_lowercase())
    }

    pub fn empty() -> Self {
        HeaderVocabulary {
            terms: BTreeSet::new(),
            min_frequency: 0,
            stoplist: BTreeSet::new(),
        }
    }
}

/// Build the header vocabulary: lowercased, punctuation-stripped words whose
/// total frequency over `headers` is at least `min_frequency` and which are
/// not stoplisted. Purely numeric tokens are never vocabulary words.
pub fn build_header_vocabulary(
    headers: &[String],
    min_frequency: usize,
    stoplist: &BTreeSet<String>,
) -> HeaderVocabulary {
    let mut freq: HashMap<String, usize> = HashMap::new();
    for header in headers {
        for token in tokens_lower(header) {
            *freq.entry(token).or_insert(0) += 1;
        }
    }
    let terms = freq
        .into_iter()
        .filter(|(t, n)| {
            *n >= min_frequency && !stoplist.contains(t) && t.chars().any(|c| c.is_alphabetic())
        })
        .map(|(t, _)| t)
        .collect();
    HeaderVocabulary {
        terms,
        min_frequency,
        stoplist: stoplist.clone(),
    }
}

// ---------------------------------------------------------------------------
// Part-of-speech heuristics (pluggable)

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Noun,
    Verb,
    Other,
}

/// Tags whitespace tokens of a line. The default is a small heuristic; a
/// statistical tagger can be substituted behind this interface.
pub trait PosTagger {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag>;
}

const AUX_AND_COMMON_VERBS: [&str; 34] = [
    "am", "is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does",
    "did", "can", "could", "shall", "should", "will", "would", "may", "might", "must", "show",
    "shows", "use", "uses", "propose", "present", "describe", "denote", "define", "consider",
    "let",
];

/// Heuristic tagger: a token is noun-like when it is capitalized past the
/// first position, carries a noun suffix, or is a header-vocabulary word;
/// verb-like when it is an auxiliary/common verb or a lowercase -ing/-ed
/// form. Verb wins when both apply.
pub struct HeuristicTagger<'a> {
    pub vocab: &'a HeaderVocabulary,
}

impl PosTagger for HeuristicTagger<'_> {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag> {
        tokens
            .iter()
            .enumerate()
            .map(|(i, raw)| {
                let stripped: String = raw
                    .trim_matches(|c: char| !c.is_alphanumeric())
                    .to_string();
                if !stripped.chars().any(|c| c.is_alphabetic()) {
                    return PosTag::Other;
                }
                let lower = stripped.to_lowercase();
                let all_lower = stripped.chars().all(|c| !c.is_uppercase());
                if AUX_AND_COMMON_VERBS.contains(&lower.as_str())
                    || (all_lower && lower.len() > 4 && (lower.ends_with("ing") || lower.ends_with("ed")))
                {
                    return PosTag::Verb;
                }
                let capitalized = stripped.chars().next().is_some_and(|c| c.is_uppercase());
                let noun_suffix = ["tion", "ment", "ness", "ity"]
                    .iter()
                    .any(|s| lower.ends_with(s));
                if (capitalized && i > 0) || noun_suffix || self.vocab.terms.contains(&lower) {
                    PosTag::Noun
                } else {
                    PosTag::Other
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Layout feature extraction

/// Reading-order neighbors of a line on the same page.
#[derive(Debug, Clone, Copy, Default)]
pub struct LineContext<'a> {
    pub prev: Option<&'a LineRecord>,
    pub next: Option<&'a LineRecord>,
}

static NUMBER_DOT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\d+(\.\d+)*\.?\s").expect("number_dot regex"));

static SEQ_NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:\d+(?:\.\d+)*|[IVXLCDM]+|[ivxlcdm]+|[A-Za-z])[.):-]?\s")
        .expect("seq_number regex")
});

const GAP_FACTOR: f64 = 1.2;

/// Compute the 16 layout features for one line.
///
/// Gaps are baseline-to-baseline against the page average; a missing
/// neighbor (start or end of page) counts as a higher-than-average gap.
/// `stats` must describe the line's page.
pub fn extract_layout_features(
    line: &LineRecord,
    context: LineContext<'_>,
    stats: &PageStats,
    vocab: &HeaderVocabulary,
) -> FeatureVector {
    let tagger = HeuristicTagger { vocab };
    extract_layout_features_with(line, context, stats, vocab, &tagger)
}

/// As [`extract_layout_features`] with an explicit part-of-speech tagger.
pub fn extract_layout_features_with(
    line: &LineRecord,
    context: LineContext<'_>,
    stats: &PageStats,
    vocab: &HeaderVocabulary,
    tagger: &dyn PosTagger,
) -> FeatureVector {
    debug_assert_eq!(stats.page_number, line.page_number);
    let text = line.text.trim();
    let tokens = words(text);
    let tags = tagger.tag(&tokens);

    let gap_above = context
        .prev
        .map(|p| line.baseline() - p.baseline())
        .unwrap_or(f64::INFINITY);
    let gap_below = context
        .next
        .map(|n| n.baseline() - line.baseline())
        .unwrap_or(f64::INFINITY);
    let threshold = GAP_FACTOR * stats.avg_line_spacing;
    let above_higher = gap_above > threshold;
    let below_higher = gap_below > threshold;

    let alpha_tokens: Vec<&&str> = tokens
        .iter()
        .filter(|t| t.chars().any(|c| c.is_alphabetic()))
        .collect();
    let noun_count = tags.iter().filter(|t| **t == PosTag::Noun).count();
    let has_verb = tags.contains(&PosTag::Verb);

    let pos_nnp = !alpha_tokens.is_empty() && noun_count as f64 / alpha_tokens.len() as f64 > 0.5;
    let without_verb_hls = !tokens.is_empty() && !has_verb && below_higher;

    let font_weight = line.font_weight > stats.avg_font_weight;
    let family = line.font_family.to_lowercase();
    let bold_italic = line.font_weight >= 600.0
        || family.contains("bold")
        || family.contains("italic")
        || family.contains("oblique");

    // Leading tokens after any numbering label; all of the first three must
    // start uppercase.
    let unnumbered = strip_leading_numbering(text);
    let lead_tokens = words(unnumbered);
    let at_least_3_upper = lead_tokens.len() >= 3
        && lead_tokens[..3]
            .iter()
            .all(|t| t.chars().next().is_some_and(|c| c.is_uppercase()));

    let higher_line_space = above_higher && below_higher;
    let number_dot = NUMBER_DOT.is_match(text);
    let len = text.chars().count();
    let text_len_group = if len <= 40 {
        0.0
    } else if len <= 90 {
        0.5
    } else {
        1.0
    };
    let seq_number = SEQ_NUMBER.is_match(text);
    let colon = text.ends_with(':');
    let depth = numbering_depth(text);
    let title_case = {
        let upper = alpha_tokens
            .iter()
            .filter(|t| {
                t.trim_matches(|c: char| !c.is_alphanumeric())
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_uppercase())
            })
            .count();
        !alpha_tokens.is_empty() && upper as f64 / alpha_tokens.len() as f64 >= 0.75
    };
    let alpha_chars: Vec<char> = text.chars().filter(|c| c.is_alphabetic()).collect();
    let all_upper = !alpha_chars.is_empty() && alpha_chars.iter().all(|c| c.is_uppercase());
    let voc = tokens_lower(text).iter().any(|t| vocab.terms.contains(t));

    let b = f64::from;
    FeatureVector::layout_only([
        b(pos_nnp),
        b(without_verb_hls),
        b(font_weight),
        b(bold_italic),
        b(at_least_3_upper),
        b(higher_line_space),
        b(number_dot),
        text_len_group,
        b(seq_number),
        b(colon),
        b(depth == Some(1)),
        b(depth == Some(2)),
        b(depth == Some(3)),
        b(title_case),
        b(all_upper),
        b(voc),
    ])
}

// ---------------------------------------------------------------------------
// TF-IDF n-gram vectorizer

/// Fitted n-gram vocabulary with document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramVectorizer {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_df: usize,
    /// n-gram (tokens joined by a single space) to dense term id.
    pub vocabulary: BTreeMap<String, u32>,
    /// Indexed by term id.
    pub document_frequency: Vec<u32>,
    pub corpus_size: usize,
}

fn ngrams_of(text: &str, ngram_min: usize, ngram_max: usize) -> Vec<String> {
    let tokens = tokens_lower(text);
    let mut out = Vec::new();
    for n in ngram_min..=ngram_max {
        if n == 0 || tokens.len() < n {
            continue;
        }
        for window in tokens.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

/// Fit a vectorizer over `texts`, keeping exactly the n-grams (n in
/// `ngram_min..=ngram_max`) whose document frequency is at least `min_df`.
/// Term ids are dense and assigned in lexicographic n-gram order.
pub fn fit_ngram_vectorizer(
    texts: &[String],
    ngram_min: usize,
    ngram_max: usize,
    min_df: usize,
) -> NgramVectorizer {
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    for text in texts {
        let distinct: BTreeSet<String> = ngrams_of(text, ngram_min, ngram_max).into_iter().collect();
        for gram in distinct {
            *df.entry(gram).or_insert(0) += 1;
        }
    }
    let mut vocabulary = BTreeMap::new();
    let mut document_frequency = Vec::new();
    for (gram, count) in df {
        if count as usize >= min_df {
            vocabulary.insert(gram, document_frequency.len() as u32);
            document_frequency.push(count);
        }
    }
    NgramVectorizer {
        ngram_min,
        ngram_max,
        min_df,
        vocabulary,
        document_frequency,
        corpus_size: texts.len(),
    }
}

impl NgramVectorizer {
    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    /// TF-IDF weights for `text`, L2-normalized. Out-of-vocabulary n-grams
    /// are dropped; weight(t) = tf(t) * (1 + ln(corpus_size / (1 + df(t)))).
    pub fn vectorize_text(&self, text: &str) -> SparseVec {
        let mut counts: HashMap<u32, f64> = HashMap::new();
        for gram in ngrams_of(text, self.ngram_min, self.ngram_max) {
            if let Some(&id) = self.vocabulary.get(&gram) {
                *counts.entry(id).or_insert(0.0) += 1.0;
            }
        }
        let mut entries: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(id, tf)| {
                let df = self.document_frequency[id as usize] as f64;
                let idf = 1.0 + (self.corpus_size as f64 / (1.0 + df)).ln();
                (id, tf * idf)
            })
            .collect();
        entries.sort_by_key(|(id, _)| *id);
        let mut vec = SparseVec {
            dim: self.vocabulary.len(),
            entries,
        };
        let norm = vec.l2_norm();
        if norm > 0.0 {
            for (_, v) in &mut vec.entries {
                *v /= norm;
            }
        }
        vec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{compute_page_statistics, Document};
    use proptest::prelude::*;

    fn line_at(text: &str, baseline: f64, size: f64, weight: f64, family: &str) -> LineRecord {
        LineRecord {
            text: text.into(),
            page_number: 1,
            font_size: size,
            font_weight: weight,
            font_family: family.into(),
            x_left: 72.0,
            x_right: 300.0,
            y_top: baseline - size,
            y_bottom: baseline,
            page_width: 612.0,
            page_height: 792.0,
            label: None,
        }
    }

    fn vocab_of(words: &[&str]) -> HeaderVocabulary {
        HeaderVocabulary {
            terms: words.iter().map(|w| w.to_string()).collect(),
            min_frequency: 1,
            stoplist: BTreeSet::new(),
        }
    }

    /// Page with regular body lines around a middle line of interest.
    fn page_fixture(mid: LineRecord) -> (Document, usize) {
        let mut doc = Document::new("t");
        doc.lines = vec![
            line_at("body line one filler", 100.0, 10.0, 400.0, "Times-Roman"),
            line_at("body line two filler", 112.0, 10.0, 400.0, "Times-Roman"),
            mid,
            line_at("body line three filler", 160.0, 10.0, 400.0, "Times-Roman"),
            line_at("body line four filler", 172.0, 10.0, 400.0, "Times-Roman"),
        ];
        doc.sort_reading_order();
        compute_page_statistics(&mut doc);
        let idx = doc
            .lines
            .iter()
            .position(|l| l.page_number == 1 && (l.baseline() - 136.0).abs() < 1.0)
            .unwrap();
        (doc, idx)
    }

    fn features_at(doc: &Document, idx: usize, vocab: &HeaderVocabulary) -> FeatureVector {
        let ctx = LineContext {
            prev: idx.checked_sub(1).and_then(|i| doc.lines.get(i)),
            next: doc.lines.get(idx + 1),
        };
        extract_layout_features(&doc.lines[idx], ctx, &doc.pages[0], vocab)
    }

    fn lay(f: &FeatureVector) -> [f64; 16] {
        f.layout.expect("layout block present")
    }

    fn idx(name: &str) -> usize {
        LAYOUT_FEATURE_NAMES.iter().position(|n| *n == name).unwrap()
    }

    #[test]
    fn numbered_bold_header_features() {
        let header = line_at("1. Introduction", 136.0, 14.0, 700.0, "Times-Bold");
        let (doc, i) = page_fixture(header);
        let vocab = vocab_of(&["introduction"]);
        let f = features_at(&doc, i, &vocab);
        assert_eq!(lay(&f)[idx("number_dot")], 1.0);
        assert_eq!(lay(&f)[idx("seq_number")], 1.0);
        assert_eq!(lay(&f)[idx("voc")], 1.0);
        assert_eq!(lay(&f)[idx("title_case")], 1.0);
        assert_eq!(lay(&f)[idx("font_weight")], 1.0);
        assert_eq!(lay(&f)[idx("bold_italic")], 1.0);
        assert_eq!(lay(&f)[idx("header_0")], 1.0);
        assert_eq!(lay(&f)[idx("header_1")], 0.0);
    }

    #[test]
    fn empty_text_line_has_zero_text_features() {
        let empty = line_at("", 136.0, 10.0, 400.0, "Times-Roman");
        let (doc, i) = page_fixture(empty);
        let f = features_at(&doc, i, &vocab_of(&[]));
        for name in [
            "pos_nnp",
            "without_verb_higher_line_space",
            "at_least_3_lines_upper",
            "number_dot",
            "text_len_group",
            "seq_number",
            "colon",
            "header_0",
            "header_1",
            "header_2",
            "title_case",
            "all_upper",
            "voc",
        ] {
            assert_eq!(lay(&f)[idx(name)], 0.0, "{name}");
        }
    }

    #[test]
    fn plain_sentence_scores_zero_on_header_cues() {
        // Same font and spacing as the page average.
        let sentence = line_at("the cat sat on the mat.", 124.0, 10.0, 400.0, "Times-Roman");
        let mut doc = Document::new("t");
        doc.lines = vec![
            line_at("body line one filler", 100.0, 10.0, 400.0, "Times-Roman"),
            line_at("body line two filler", 112.0, 10.0, 400.0, "Times-Roman"),
            sentence,
            line_at("body line three filler", 136.0, 10.0, 400.0, "Times-Roman"),
        ];
        compute_page_statistics(&mut doc);
        let f = features_at(&doc, 2, &vocab_of(&["introduction"]));
        assert_eq!(lay(&f)[idx("higher_line_space")], 0.0);
        assert_eq!(lay(&f)[idx("all_upper")], 0.0);
        assert_eq!(lay(&f)[idx("colon")], 0.0);
        assert_eq!(lay(&f)[idx("pos_nnp")], 0.0);
        assert_eq!(lay(&f)[idx("font_weight")], 0.0);
    }

    #[test]
    fn header_depth_features_grade_by_numbering() {
        for (text, expect) in [
            ("2 Approach", "header_0"),
            ("2.3 Features", "header_1"),
            ("2.3.1 Details", "header_2"),
        ] {
            let l = line_at(text, 136.0, 10.0, 400.0, "F");
            let (doc, i) = page_fixture(l);
            let f = features_at(&doc, i, &vocab_of(&[]));
            for name in ["header_0", "header_1", "header_2"] {
                let want = f64::from(name == expect);
                assert_eq!(lay(&f)[idx(name)], want, "{text} {name}");
            }
        }
    }

    #[test]
    fn vocabulary_keeps_frequent_non_stop_words() {
        let mut headers: Vec<String> = Vec::new();
        for _ in 0..5 {
            headers.push("Introduction".into());
            headers.push("References".into());
            headers.push("Proof of Theorem".into());
            headers.push("Appendix A".into());
            headers.push("Conclusions".into());
        }
        headers.push("Rare Section".into());
        let vocab = build_header_vocabulary(&headers, 3, &DEFAULT_STOPLIST);
        for word in ["introduction", "references", "proof", "appendix", "conclusions"] {
            assert!(vocab.contains(word), "{word}");
        }
        assert!(!vocab.contains("rare"));
        assert!(!vocab.contains("of"), "stoplisted word kept");
    }

    #[test]
    fn empty_header_list_gives_empty_vocabulary() {
        let vocab = build_header_vocabulary(&[], 2, &DEFAULT_STOPLIST);
        assert!(vocab.terms.is_empty());
    }

    #[test]
    fn word_below_min_frequency_excluded() {
        // "results" appears exactly min_frequency - 1 times.
        let headers: Vec<String> = vec!["Results".into(), "Results".into(), "Methods".into()];
        let vocab = build_header_vocabulary(&headers, 3, &DEFAULT_STOPLIST);
        assert!(!vocab.contains("results"));
    }

    #[test]
    fn tiny_corpus_ngram_vocabulary() {
        let texts = vec!["a b".to_string(), "a b".to_string()];
        let v = fit_ngram_vectorizer(&texts, 1, 3, 1);
        let grams: Vec<&String> = v.vocabulary.keys().collect();
        assert_eq!(grams, ["a", "a b", "b"]);
        assert_eq!(v.corpus_size, 2);
        assert_eq!(v.document_frequency, vec![2, 2, 2]);
    }

    #[test]
    fn min_df_above_corpus_size_empties_vocabulary() {
        let texts = vec!["a b".to_string(), "c d".to_string()];
        let v = fit_ngram_vectorizer(&texts, 1, 3, 5);
        assert!(v.is_empty());
    }

    #[test]
    fn document_frequency_counts_documents() {
        let texts = vec![
            "introduction to things".to_string(),
            "the introduction".to_string(),
            "introduction introduction".to_string(),
            "unrelated".to_string(),
        ];
        let v = fit_ngram_vectorizer(&texts, 1, 1, 1);
        let id = v.vocabulary["introduction"];
        assert_eq!(v.document_frequency[id as usize], 3);
    }

    #[test]
    fn vectorize_out_of_vocabulary_is_empty() {
        let v = fit_ngram_vectorizer(&["a b".to_string(), "a b".to_string()], 1, 3, 1);
        let out = v.vectorize_text("z q");
        assert!(out.entries.is_empty());
        assert_eq!(out.l2_norm(), 0.0);
    }

    #[test]
    fn single_term_vectorizes_to_unit_weight() {
        let v = fit_ngram_vectorizer(&["a b".to_string(), "a b".to_string()], 1, 3, 1);
        let out = v.vectorize_text("a");
        assert_eq!(out.entries.len(), 1);
        assert!((out.entries[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tfidf_matches_hand_arithmetic() {
        // Corpus ["a b", "a b"]: every gram has df = 2, N = 2, so the common
        // idf factor is 1 + ln(2/3). Text "a a b" hits grams a (tf 2),
        // b (tf 1), "a b" (tf 1); "a a" is out of vocabulary.
        let v = fit_ngram_vectorizer(&["a b".to_string(), "a b".to_string()], 1, 3, 1);
        let out = v.vectorize_text("a a b");
        let idf = 1.0 + (2.0f64 / 3.0).ln();
        let raw = [2.0 * idf, idf, idf]; // ids: a=0, "a b"=1, b=2
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let expect = [
            (v.vocabulary["a"], raw[0] / norm),
            (v.vocabulary["a b"], raw[1] / norm),
            (v.vocabulary["b"], raw[2] / norm),
        ];
        for (id, want) in expect {
            let got = out.get(id);
            assert!((got - want).abs() < 1e-12, "id {id}: {got} vs {want}");
        }
        assert!((out.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combine_preserves_layout_and_dimension() {
        let layout = FeatureVector::layout_only([0.5; 16]);
        let text = SparseVec {
            dim: 3,
            entries: vec![(0, 0.6), (2, 0.8)],
        };
        let combined = combine(layout.clone(), text.clone());
        assert_eq!(combined.layout, layout.layout);
        assert_eq!(combined.dimension(), 19);

        let empty = combine(layout.clone(), SparseVec::default());
        assert_eq!(empty.layout, layout.layout);
        assert_eq!(empty.dimension(), 16);
    }

    proptest! {
        /// Scaling all coordinates and font sizes on a page by a constant
        /// leaves every layout feature unchanged.
        #[test]
        fn features_scale_invariant(scale in 0.1f64..10.0, seed in 0u64..500) {
            let texts = ["1. Introduction", "plain body text here", "2.3 Methods", "THE END"];
            let text = texts[(seed % 4) as usize];
            let mid = line_at(text, 136.0, 14.0, 700.0, "Times-Bold");
            let (doc, i) = page_fixture(mid);
            let vocab = vocab_of(&["introduction", "methods"]);
            let base = features_at(&doc, i, &vocab);

            let mut scaled = doc.clone();
            for l in &mut scaled.lines {
                l.font_size *= scale;
                l.x_left *= scale;
                l.x_right *= scale;
                l.y_top *= scale;
                l.y_bottom *= scale;
                l.page_width *= scale;
                l.page_height *= scale;
            }
            compute_page_statistics(&mut scaled);
            let got = features_at(&scaled, i, &vocab);
            prop_assert_eq!(base.layout, got.layout);
        }

        /// vectorize_text output norm is always 0 or 1.
        #[test]
        fn tfidf_norm_zero_or_one(text in "[a-d ]{0,30}") {
            let corpus = vec!["a b c".to_string(), "b c d".to_string(), "a d".to_string()];
            let v = fit_ngram_vectorizer(&corpus, 1, 2, 1);
            let out = v.vectorize_text(&text);
            let norm = out.l2_norm();
            prop_assert!(norm.abs() < 1e-9 || (norm - 1.0).abs() < 1e-9);
        }
    }
}
