//! LDA topic modeling over section texts via collapsed Gibbs sampling,
//! plus per-section semantic concepts and the half-split cosine evaluation.

use crate::error::{Error, Result};
use crate::learn::{read_magic_json, write_magic_json};
use crate::text::tokens_lower;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 500;
pub const DEFAULT_MIN_SECTIONS: usize = 20;
pub const DEFAULT_MAX_FRACTION: f64 = 0.10;
pub const DEFAULT_DICTIONARY_CAP: usize = 100_000;

/// Symmetric document-topic prior, scaled by topic count.
pub fn default_alpha(k: usize) -> f64 {
    50.0 / k as f64
}

/// How section text becomes dictionary tokens: unigrams, bigrams only, or
/// phrases (unigrams + bigrams + trigrams).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenMode {
    Words,
    Bigrams,
    Phrases,
}

impl std::str::FromStr for TokenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "words" | "word" => Ok(TokenMode::Words),
            "bigrams" | "bigram" => Ok(TokenMode::Bigrams),
            "phrases" | "phrase" => Ok(TokenMode::Phrases),
            other => Err(Error::Contract(format!(
                "unknown token mode {other:?} (expected words, bigrams, or phrases)"
            ))),
        }
    }
}

/// Tokenize a section text under the given mode.
pub fn section_tokens(text: &str, mode: TokenMode) -> Vec<String> {
    let words = tokens_lower(text);
    let range = match mode {
        TokenMode::Words => 1..=1,
        TokenMode::Bigrams => 2..=2,
        TokenMode::Phrases => 1..=3,
    };
    let mut out = Vec::new();
    for n in range {
        if words.len() < n {
            continue;
        }
        for w in words.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

/// Term table with section frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaDictionary {
    /// Term id -> term, lexicographically ordered.
    pub terms: Vec<String>,
    /// Sections containing the term at least once, per id.
    pub section_frequency: Vec<u32>,
    pub min_sections: usize,
    pub max_fraction: f64,
}

impl LdaDictionary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id_of(&self, term: &str) -> Option<u32> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok().map(|i| i as u32)
    }

    /// Map tokens to ids, dropping out-of-dictionary tokens.
    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id_of(t)).collect()
    }
}

/// Keep terms appearing in at least `min_sections` sections and at most
/// `max_fraction` of them, truncated to the `cap` most frequent (frequency
/// descending, then lexicographic). Deterministic.
pub fn build_dictionary(
    sections: &[Vec<String>],
    min_sections: usize,
    max_fraction: f64,
    cap: usize,
) -> Result<LdaDictionary> {
    if !(max_fraction > 0.0 && max_fraction <= 1.0) {
        return Err(Error::Contract(format!(
            "max_fraction must be in (0, 1], got {max_fraction}"
        )));
    }
    let mut sf: BTreeMap<&str, u32> = BTreeMap::new();
    for tokens in sections {
        let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *sf.entry(t).or_insert(0) += 1;
        }
    }
    let limit = max_fraction * sections.len() as f64;
    let mut kept: Vec<(&str, u32)> = sf
        .into_iter()
        .filter(|(_, n)| *n as usize >= min_sections && f64::from(*n) <= limit)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    kept.truncate(cap);
    kept.sort_by(|a, b| a.0.cmp(b.0));
    Ok(LdaDictionary {
        terms: kept.iter().map(|(t, _)| t.to_string()).collect(),
        section_frequency: kept.iter().map(|(_, n)| *n).collect(),
        min_sections,
        max_fraction,
    })
}

/// Trained LDA state: dictionary, hyperparameters, and the count matrices
/// the collapsed sampler left behind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub dictionary: LdaDictionary,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    /// K x V topic-word counts.
    pub topic_word_counts: Vec<Vec<u32>>,
    /// Tokens assigned to each topic.
    pub topic_totals: Vec<u64>,
    /// Per training document, K topic counts.
    pub doc_topic_counts: Vec<Vec<u32>>,
    /// In-sample per-token predictive log-likelihood after each sweep.
    pub log_likelihood_history: Vec<f64>,
}

impl TopicModel {
    /// Smoothed topic-word probability.
    pub fn phi(&self, topic: usize, word: u32) -> f64 {
        let v = self.dictionary.len() as f64;
        (self.topic_word_counts[topic][word as usize] as f64 + self.beta)
            / (self.topic_totals[topic] as f64 + v * self.beta)
    }

    /// Top `n` terms of a topic by probability, ties broken alphabetically.
    pub fn top_terms(&self, topic: usize, n: usize) -> Vec<String> {
        let mut ids: Vec<u32> = (0..self.dictionary.len() as u32).collect();
        ids.sort_by(|a, b| {
            self.topic_word_counts[topic][*b as usize]
                .cmp(&self.topic_word_counts[topic][*a as usize])
                .then(self.dictionary.terms[*a as usize].cmp(&self.dictionary.terms[*b as usize]))
        });
        ids.truncate(n);
        ids.into_iter()
            .map(|i| self.dictionary.terms[i as usize].clone())
            .collect()
    }

    pub fn save(&self, sink: &mut dyn Write) -> Result<()> {
        write_magic_json(*b"DSTM", 1, self, sink)
    }

    pub fn load(source: &mut dyn Read) -> Result<TopicModel> {
        read_magic_json(*b"DSTM", 1, source)
    }
}

/// Incremental collapsed Gibbs sampler; tests drive sweeps directly to
/// check count conservation.
pub struct LdaTrainer {
    dictionary: LdaDictionary,
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u64>,
    rng: ChaCha8Rng,
    sweeps: usize,
    history: Vec<f64>,
}

impl LdaTrainer {
    pub fn new(
        sections: &[Vec<String>],
        dictionary: LdaDictionary,
        k: usize,
        alpha: f64,
        beta: f64,
        seed: u64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Contract("topic count K must be at least 1".into()));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::Contract(
                "alpha and beta must be positive".into(),
            ));
        }
        let docs: Vec<Vec<u32>> = sections.iter().map(|s| dictionary.encode(s)).collect();
        if docs.iter().all(Vec::is_empty) {
            return Err(Error::Data(
                "no section has in-dictionary tokens; nothing to train on".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = dictionary.len();
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut topic_word = vec![vec![0u32; v]; k];
        let mut topic_total = vec![0u64; k];
        let mut assignments = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let topic = rng.random_range(0..k);
                z.push(topic);
                doc_topic[d][topic] += 1;
                topic_word[topic][w as usize] += 1;
                topic_total[topic] += 1;
            }
            assignments.push(z);
        }
        Ok(LdaTrainer {
            dictionary,
            k,
            alpha,
            beta,
            seed,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            sweeps: 0,
            history: Vec::new(),
        })
    }

    /// One full Gibbs sweep over every token, using the standard collapsed
    /// conditional (n_dk + alpha)(n_kw + beta)/(n_k + V*beta).
    pub fn sweep(&mut self) {
        let v_beta = self.dictionary.len() as f64 * self.beta;
        let mut weights = vec![0.0f64; self.k];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for (t, weight) in weights.iter_mut().enumerate() {
                    *weight = (self.doc_topic[d][t] as f64 + self.alpha)
                        * (self.topic_word[t][w] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + v_beta);
                    total += *weight;
                }
                let mut target = self.rng.random::<f64>() * total;
                let mut new = self.k - 1;
                for (t, weight) in weights.iter().enumerate() {
                    target -= weight;
                    if target <= 0.0 {
                        new = t;
                        break;
                    }
                }
                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
        self.history.push(self.log_likelihood());
    }

    /// In-sample per-token predictive log-likelihood under the current
    /// counts.
    pub fn log_likelihood(&self) -> f64 {
        let v_beta = self.dictionary.len() as f64 * self.beta;
        let k_alpha = self.k as f64 * self.alpha;
        let mut ll = 0.0;
        let mut tokens = 0usize;
        for (d, doc) in self.docs.iter().enumerate() {
            let n_d = doc.len() as f64;
            for &w in doc {
                let mut p = 0.0;
                for t in 0..self.k {
                    let theta = (self.doc_topic[d][t] as f64 + self.alpha) / (n_d + k_alpha);
                    let phi = (self.topic_word[t][w as usize] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + v_beta);
                    p += theta * phi;
                }
                ll += p.ln();
                tokens += 1;
            }
        }
        ll / tokens as f64
    }

    /// Count conservation: per-document topic counts sum to the document
    /// length, and topic-word counts are consistent with topic totals.
    pub fn counts_consistent(&self) -> bool {
        for (d, doc) in self.docs.iter().enumerate() {
            let sum: u32 = self.doc_topic[d].iter().sum();
            if sum as usize != doc.len() {
                return false;
            }
        }
        for t in 0..self.k {
            let sum: u64 = self.topic_word[t].iter().map(|c| u64::from(*c)).sum();
            if sum != self.topic_total[t] {
                return false;
            }
        }
        let assigned: u64 = self.topic_total.iter().sum();
        let tokens: u64 = self.docs.iter().map(|d| d.len() as u64).sum();
        assigned == tokens
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            dictionary: self.dictionary,
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            iterations: self.sweeps,
            topic_word_counts: self.topic_word,
            topic_totals: self.topic_total,
            doc_topic_counts: self.doc_topic,
            log_likelihood_history: self.history,
        }
    }
}

/// Train an LDA model with `iterations` full Gibbs sweeps. Deterministic
/// for a fixed (corpus order, seed, iterations).
pub fn train_lda(
    sections: &[Vec<String>],
    dictionary: LdaDictionary,
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
) -> Result<TopicModel> {
    let mut trainer = LdaTrainer::new(sections, dictionary, k, alpha, beta, seed)?;
    for _ in 0..iterations {
        trainer.sweep();
        debug_assert!(trainer.counts_consistent());
    }
    Ok(trainer.into_model())
}

/// Topic distribution for one section, with how many tokens were usable.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicDistribution {
    pub probs: Vec<f64>,
    pub used_tokens: usize,
}

impl TopicDistribution {
    /// Highest-probability topic, ties toward the lower index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate().skip(1) {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Fold-in Gibbs inference on a new section with frozen topic-word counts.
/// A section with no in-dictionary tokens gets the uniform distribution
/// (`used_tokens` = 0 is the diagnostic).
pub fn infer_topics(
    model: &TopicModel,
    tokens: &[String],
    iterations: usize,
    seed: u64,
) -> TopicDistribution {
    let ids = model.dictionary.encode(tokens);
    let k = model.k;
    if ids.is_empty() {
        return TopicDistribution {
            probs: vec![1.0 / k as f64; k],
            used_tokens: 0,
        };
    }
    let v_beta = model.dictionary.len() as f64 * model.beta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<usize> = Vec::with_capacity(ids.len());
    let mut local = vec![0u32; k];
    for _ in &ids {
        let t = rng.random_range(0..k);
        z.push(t);
        local[t] += 1;
    }
    let mut weights = vec![0.0f64; k];
    for _ in 0..iterations.max(1) {
        for (i, &w) in ids.iter().enumerate() {
            let old = z[i];
            local[old] -= 1;
            let mut total = 0.0;
            for (t, weight) in weights.iter_mut().enumerate() {
                *weight = (local[t] as f64 + model.alpha)
                    * (model.topic_word_counts[t][w as usize] as f64 + model.beta)
                    / (model.topic_totals[t] as f64 + v_beta);
                total += *weight;
            }
            let mut target = rng.random::<f64>() * total;
            let mut new = k - 1;
            for (t, weight) in weights.iter().enumerate() {
                target -= weight;
                if target <= 0.0 {
                    new = t;
                    break;
                }
            }
            z[i] = new;
            local[new] += 1;
        }
    }
    let n = ids.len() as f64;
    let k_alpha = k as f64 * model.alpha;
    TopicDistribution {
        probs: local
            .iter()
            .map(|c| (*c as f64 + model.alpha) / (n + k_alpha))
            .collect(),
        used_tokens: ids.len(),
    }
}

/// Semantic concepts of a section: the top `n_terms` words of its argmax
/// topic. `n_terms` clamps to the dictionary size.
pub fn semantic_concepts(
    model: &TopicModel,
    tokens: &[String],
    n_terms: usize,
    iterations: usize,
    seed: u64,
) -> Vec<String> {
    if n_terms == 0 {
        return Vec::new();
    }
    let dist = infer_topics(model, tokens, iterations, seed);
    model.top_terms(dist.argmax(), n_terms.min(model.dictionary.len()))
}

/// Cosine similarity between two dense vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSplitReport {
    /// Per chunk: (mean intra-section cosine, mean inter-section cosine).
    pub per_chunk: Vec<(f64, f64)>,
    pub skipped_short_sections: usize,
}

/// Half-split evaluation: per section, the topic distributions of its two
/// halves are compared (intra); each first half is also compared against
/// the second half of a seeded-random other section in the same chunk
/// (inter). Sections with fewer than 2 in-dictionary tokens are skipped.
pub fn half_split_similarity_eval(
    model: &TopicModel,
    sections: &[Vec<String>],
    chunks: usize,
    iterations: usize,
    seed: u64,
) -> Result<HalfSplitReport> {
    if chunks == 0 {
        return Err(Error::Contract("chunk count must be at least 1".into()));
    }
    let mut halves: Vec<(TopicDistribution, TopicDistribution)> = Vec::new();
    let mut skipped = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tokens in sections {
        let in_dict: Vec<String> = tokens
            .iter()
            .filter(|t| model.dictionary.id_of(t).is_some())
            .cloned()
            .collect();
        if in_dict.len() < 2 {
            skipped += 1;
            continue;
        }
        let mid = in_dict.len().div_ceil(2);
        let first = infer_topics(model, &in_dict[..mid], iterations, rng.next_u64());
        let second = infer_topics(model, &in_dict[mid..], iterations, rng.next_u64());
        halves.push((first, second));
    }
    if halves.is_empty() {
        return Err(Error::Data(
            "no section long enough for the half-split evaluation".into(),
        ));
    }

    let n = halves.len();
    let chunks = chunks.min(n);
    let base = n / chunks;
    let extra = n % chunks;
    let mut per_chunk = Vec::with_capacity(chunks);
    let mut start = 0usize;
    for c in 0..chunks {
        let size = base + usize::from(c < extra);
        let slice = &halves[start..start + size];
        let intra: f64 = slice
            .iter()
            .map(|(a, b)| cosine(&a.probs, &b.probs))
            .sum::<f64>()
            / size as f64;
        let inter: f64 = if size < 2 {
            0.0
        } else {
            slice
                .iter()
                .enumerate()
                .map(|(i, (a, _))| {
                    let mut j = rng.random_range(0..size - 1);
                    if j >= i {
                        j += 1;
                    }
                    cosine(&a.probs, &slice[j].1.probs)
                })
                .sum::<f64>()
                / size as f64
        };
        per_chunk.push((intra, inter));
        start += size;
    }
    Ok(HalfSplitReport {
        per_chunk,
        skipped_short_sections: skipped,
    })
}

/// Held-out per-token log-likelihood under fold-in estimates (the usual
/// log-perplexity convention: closer to zero is a better fit). Tokens
/// outside the dictionary are ignored.
pub fn log_perplexity(
    model: &TopicModel,
    sections: &[Vec<String>],
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    let v_beta = model.dictionary.len() as f64 * model.beta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ll = 0.0;
    let mut tokens = 0usize;
    for section in sections {
        let ids = model.dictionary.encode(section);
        if ids.is_empty() {
            continue;
        }
        let dist = infer_topics(model, section, iterations, rng.next_u64());
        for &w in &ids {
            let mut p = 0.0;
            for t in 0..model.k {
                let phi = (model.topic_word_counts[t][w as usize] as f64 + model.beta)
                    / (model.topic_totals[t] as f64 + v_beta);
                p += dist.probs[t] * phi;
            }
            ll += p.ln();
            tokens += 1;
        }
    }
    if tokens == 0 {
        return Err(Error::Data(
            "held-out set has no in-dictionary tokens".into(),
        ));
    }
    Ok(ll / tokens as f64)
}
