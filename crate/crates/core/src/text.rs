//! Small text utilities shared across the pipeline: tokenization, header
//! normalization, numbering detection, and edit-distance similarity.

use regex::Regex;
use std::sync::LazyLock;

static NUMBERING: LazyLock<Regex> = LazyLock::new(|| {
    // "2", "2.3", "2.3.1", optionally with a trailing dot: the numeric
    // section-numbering prefix. Roman numerals and single letters are
    // handled separately (they carry no depth information).
    Regex::new(r"^\s*(\d+)((?:\.\d+)*)\.?(\s+|$)").expect("numbering regex")
});

static LEADING_LABEL: LazyLock<Regex> = LazyLock::new(|| {
    // Any leading numbering-ish label: digits-with-dots, a roman numeral,
    // or a single letter, each followed by an optional separator.
    Regex::new(r"^\s*(?:\d+(?:\.\d+)*\.?|[IVXLCDM]+\.|[ivxlcdm]+\.|[A-Za-z][.)])\s+")
        .expect("leading label regex")
});

/// Whitespace-separated raw tokens, case preserved.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Lowercased alphanumeric runs; punctuation acts as a separator.
pub fn tokens_lower(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lc in ch.to_lowercase() {
                cur.push(lc);
            }
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Depth of a numeric section-numbering prefix: "2" -> 1, "2.3" -> 2,
/// "2.3.1" -> 3. `None` when the text does not start with one.
pub fn numbering_depth(text: &str) -> Option<usize> {
    let caps = NUMBERING.captures(text)?;
    let tail = caps.get(2).map_or("", |m| m.as_str());
    Some(1 + tail.matches('.').count())
}

/// Strip a leading numbering label ("1.", "IV.", "A)") if present.
pub fn strip_leading_numbering(text: &str) -> &str {
    match LEADING_LABEL.find(text) {
        Some(m) => &text[m.end()..],
        None => text.trim_start(),
    }
}

/// Canonical form used when comparing headers: numbering stripped,
/// lowercased, whitespace collapsed to single spaces.
pub fn normalize_header(text: &str) -> String {
    strip_leading_numbering(text)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Classic Levenshtein edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Normalized similarity in [0, 1] between two header strings, computed on
/// their canonical forms: 1 - distance / max_length. Two empty strings are
/// identical (1.0); one empty string matches nothing (0.0).
pub fn header_similarity(a: &str, b: &str) -> f64 {
    let na = normalize_header(a);
    let nb = normalize_header(b);
    if na.is_empty() && nb.is_empty() {
        return 1.0;
    }
    let max_len = na.chars().count().max(nb.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&na, &nb) as f64 / max_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbering_depths() {
        assert_eq!(numbering_depth("2 Approach"), Some(1));
        assert_eq!(numbering_depth("2.3 Features"), Some(2));
        assert_eq!(numbering_depth("2.3.1 Details"), Some(3));
        assert_eq!(numbering_depth("1. Introduction"), Some(1));
        assert_eq!(numbering_depth("Introduction"), None);
        assert_eq!(numbering_depth("IV. Results"), None);
        assert_eq!(numbering_depth("2"), Some(1));
    }

    #[test]
    fn strip_numbering_variants() {
        assert_eq!(strip_leading_numbering("1. Introduction"), "Introduction");
        assert_eq!(strip_leading_numbering("2.3.1 Details"), "Details");
        assert_eq!(strip_leading_numbering("IV. Results"), "Results");
        assert_eq!(strip_leading_numbering("A) Appendix"), "Appendix");
        assert_eq!(strip_leading_numbering("Introduction"), "Introduction");
    }

    #[test]
    fn normalization_collapses_case_and_space() {
        assert_eq!(normalize_header("1.  Related   Work"), "related work");
        assert_eq!(normalize_header("RELATED WORK"), "related work");
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", "abc"), 0);
    }

    #[test]
    fn similarity_bounds() {
        assert!((header_similarity("Introduction", "1 Introduction") - 1.0).abs() < 1e-12);
        assert_eq!(header_similarity("", ""), 1.0);
        assert!(header_similarity("abc", "xyz") < 0.5);
    }

    #[test]
    fn tokens_lower_splits_punctuation() {
        assert_eq!(tokens_lower("Hello, World!"), vec!["hello", "world"]);
        assert_eq!(tokens_lower("don't"), vec!["don", "t"]);
        assert!(tokens_lower("  ").is_empty());
    }
}
