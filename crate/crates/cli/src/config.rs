//! Flat key = value configuration. Every tunable default lives here; CLI
//! flags override individual keys.

use anyhow::{anyhow, bail, Context, Result};
use docstruct_core::learn::{Classifier, Hyperparams};
use docstruct_core::semantics::DEFAULT_MAX_SEQUENCE;
use docstruct_core::structure::VectorMode;
use docstruct_core::summarize::{DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_RATIO, DEFAULT_TOLERANCE};
use docstruct_core::topics::{
    TokenMode, DEFAULT_BETA, DEFAULT_DICTIONARY_CAP, DEFAULT_ITERATIONS, DEFAULT_K,
    DEFAULT_MAX_FRACTION, DEFAULT_MIN_SECTIONS,
};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    pub mode: VectorMode,
    pub classifier: Classifier,
    pub semantic_classifier: Classifier,
    pub similarity_threshold: f64,
    pub folds: usize,
    pub threads: usize,

    pub vocab_min_frequency: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_df: usize,
    pub truncation: usize,

    pub nb_alpha: f64,
    pub dt_max_depth: usize,
    pub dt_min_samples_leaf: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,

    pub k_topics: usize,
    /// None means the 50/K rule.
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub lda_iterations: usize,
    pub lda_infer_iterations: usize,
    pub lda_min_sections: usize,
    pub lda_max_fraction: f64,
    pub lda_cap: usize,
    pub token_mode: TokenMode,
    pub concepts_per_section: usize,

    pub summary_ratio: f64,
    pub textrank_damping: f64,
    pub textrank_tolerance: f64,
    pub textrank_max_iterations: usize,

    pub max_sequence_length: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            mode: VectorMode::Combined,
            classifier: Classifier::LinearSvm,
            semantic_classifier: Classifier::NaiveBayes,
            similarity_threshold: 0.85,
            folds: 5,
            threads: 0,
            vocab_min_frequency: 3,
            ngram_min: 1,
            ngram_max: 3,
            min_df: 3,
            truncation: 200,
            nb_alpha: 1.0,
            dt_max_depth: 12,
            dt_min_samples_leaf: 5,
            svm_c: 1.0,
            svm_epochs: 50,
            k_topics: DEFAULT_K,
            lda_alpha: None,
            lda_beta: DEFAULT_BETA,
            lda_iterations: DEFAULT_ITERATIONS,
            lda_infer_iterations: 50,
            lda_min_sections: DEFAULT_MIN_SECTIONS,
            lda_max_fraction: DEFAULT_MAX_FRACTION,
            lda_cap: DEFAULT_DICTIONARY_CAP,
            token_mode: TokenMode::Words,
            concepts_per_section: 5,
            summary_ratio: DEFAULT_RATIO,
            textrank_damping: DEFAULT_DAMPING,
            textrank_tolerance: DEFAULT_TOLERANCE,
            textrank_max_iterations: DEFAULT_MAX_ITER,
            max_sequence_length: DEFAULT_MAX_SEQUENCE,
        }
    }
}

impl Config {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            nb_alpha: self.nb_alpha,
            dt_max_depth: self.dt_max_depth,
            dt_min_samples_leaf: self.dt_min_samples_leaf,
            svm_c: self.svm_c,
            svm_epochs: self.svm_epochs,
        }
    }

    pub fn feature_config(&self) -> docstruct_core::experiment::FeatureConfig {
        docstruct_core::experiment::FeatureConfig {
            vocab_min_frequency: self.vocab_min_frequency,
            ngram_min: self.ngram_min,
            ngram_max: self.ngram_max,
            min_df: self.min_df,
            truncation: self.truncation,
        }
    }

    pub fn lda_alpha_value(&self) -> f64 {
        self.lda_alpha
            .unwrap_or_else(|| docstruct_core::topics::default_alpha(self.k_topics))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config = Config::default();
        for (lineno, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            config
                .set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = value.parse()?,
            "mode" => self.mode = value.parse()?,
            "classifier" => self.classifier = value.parse()?,
            "semantic_classifier" => self.semantic_classifier = value.parse()?,
            "similarity_threshold" => self.similarity_threshold = value.parse()?,
            "folds" => self.folds = value.parse()?,
            "threads" => self.threads = value.parse()?,
            "vocab_min_frequency" => self.vocab_min_frequency = value.parse()?,
            "ngram_min" => self.ngram_min = value.parse()?,
            "ngram_max" => self.ngram_max = value.parse()?,
            "min_df" => self.min_df = value.parse()?,
            "truncation" => self.truncation = value.parse()?,
            "nb_alpha" => self.nb_alpha = value.parse()?,
            "dt_max_depth" => self.dt_max_depth = value.parse()?,
            "dt_min_samples_leaf" => self.dt_min_samples_leaf = value.parse()?,
            "svm_c" => self.svm_c = value.parse()?,
            "svm_epochs" => self.svm_epochs = value.parse()?,
            "k_topics" => self.k_topics = value.parse()?,
            "lda_alpha" => {
                self.lda_alpha = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(value.parse()?)
                }
            }
            "lda_beta" => self.lda_beta = value.parse()?,
            "lda_iterations" => self.lda_iterations = value.parse()?,
            "lda_infer_iterations" => self.lda_infer_iterations = value.parse()?,
            "lda_min_sections" => self.lda_min_sections = value.parse()?,
            "lda_max_fraction" => self.lda_max_fraction = value.parse()?,
            "lda_cap" => self.lda_cap = value.parse()?,
            "token_mode" => self.token_mode = value.parse()?,
            "concepts_per_section" => self.concepts_per_section = value.parse()?,
            "summary_ratio" => self.summary_ratio = value.parse()?,
            "textrank_damping" => self.textrank_damping = value.parse()?,
            "textrank_tolerance" => self.textrank_tolerance = value.parse()?,
            "textrank_max_iterations" => self.textrank_max_iterations = value.parse()?,
            "max_sequence_length" => self.max_sequence_length = value.parse()?,
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Render the full configuration in the flat file format.
    pub fn to_text(&self) -> String {
        let alpha = match self.lda_alpha {
            Some(a) => a.to_string(),
            None => "auto".into(),
        };
        format!(
            "# docstruct configuration (key = value); flags override these.\n\
             seed = {}\n\
             mode = {}\n\
             classifier = {}\n\
             semantic_classifier = {}\n\
             similarity_threshold = {}\n\
             folds = {}\n\
             threads = {}\n\
             \n# features\n\
             vocab_min_frequency = {}\n\
             ngram_min = {}\n\
             ngram_max = {}\n\
             min_df = {}\n\
             truncation = {}\n\
             \n# classifiers\n\
             nb_alpha = {}\n\
             dt_max_depth = {}\n\
             dt_min_samples_leaf = {}\n\
             svm_c = {}\n\
             svm_epochs = {}\n\
             \n# topics\n\
             k_topics = {}\n\
             lda_alpha = {}\n\
             lda_beta = {}\n\
             lda_iterations = {}\n\
             lda_infer_iterations = {}\n\
             lda_min_sections = {}\n\
             lda_max_fraction = {}\n\
             lda_cap = {}\n\
             token_mode = {}\n\
             concepts_per_section = {}\n\
             \n# summarization\n\
             summary_ratio = {}\n\
             textrank_damping = {}\n\
             textrank_tolerance = {}\n\
             textrank_max_iterations = {}\n\
             \n# sequencing\n\
             max_sequence_length = {}\n",
            self.seed,
            self.mode,
            self.classifier,
            self.semantic_classifier,
            self.similarity_threshold,
            self.folds,
            self.threads,
            self.vocab_min_frequency,
            self.ngram_min,
            self.ngram_max,
            self.min_df,
            self.truncation,
            self.nb_alpha,
            self.dt_max_depth,
            self.dt_min_samples_leaf,
            self.svm_c,
            self.svm_epochs,
            self.k_topics,
            alpha,
            self.lda_beta,
            self.lda_iterations,
            self.lda_infer_iterations,
            self.lda_min_sections,
            self.lda_max_fraction,
            self.lda_cap,
            match self.token_mode {
                TokenMode::Words => "words",
                TokenMode::Bigrams => "bigrams",
                TokenMode::Phrases => "phrases",
            },
            self.concepts_per_section,
            self.summary_ratio,
            self.textrank_damping,
            self.textrank_tolerance,
            self.textrank_max_iterations,
            self.max_sequence_length,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_text() {
        let config = Config::default();
        let text = config.to_text();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.conf");
        std::fs::write(&path, &text).unwrap();
        let loaded = Config::load(&path).unwrap();
        assert_eq!(loaded.to_text(), text);
    }

    #[test]
    fn documented_defaults_present() {
        let text = Config::default().to_text();
        for needle in [
            "similarity_threshold = 0.85",
            "nb_alpha = 1",
            "dt_max_depth = 12",
            "dt_min_samples_leaf = 5",
            "svm_c = 1",
            "svm_epochs = 50",
            "k_topics = 10",
            "lda_alpha = auto",
            "lda_beta = 0.01",
            "lda_iterations = 500",
            "lda_min_sections = 20",
            "lda_max_fraction = 0.1",
            "lda_cap = 100000",
            "truncation = 200",
            "max_sequence_length = 15",
            "summary_ratio = 0.2",
            "textrank_damping = 0.85",
            "textrank_max_iterations = 100",
            "folds = 5",
        ] {
            assert!(text.contains(needle), "missing {needle}\n{text}");
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut c = Config::default();
        assert!(c.set("no_such_key", "1").is_err());
    }
}
