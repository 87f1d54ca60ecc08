//! Shared fixtures for the criterion benchmarks.

use docstruct_core::synthgen::{generate_corpus, CorpusSpec};
use docstruct_core::Document;

/// The standard benchmark corpus: deterministic, moderate size.
pub fn bench_corpus(n_docs: usize) -> Vec<Document> {
    generate_corpus(&CorpusSpec {
        n_docs,
        seed: 7777,
        ..CorpusSpec::default()
    })
    .expect("benchmark corpus generates")
}
