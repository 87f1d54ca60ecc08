//! Command-line front end: corpus generation, ingestion, training,
//! evaluation, structure recovery, semantic annotation, topic modeling,
//! summarization, and the full document pipeline.

mod commands;
mod config;
mod io;
mod pipeline;

use clap::{Args, Parser, Subcommand};
use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "docstruct", version, about = "Logical and semantic document structure recovery")]
struct Cli {
    /// Configuration file (flat key = value); flags override.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master random seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for document-parallel stages (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Vector mode: layout, text, or combined.
    #[arg(long)]
    mode: Option<String>,
    /// Classifier: nb, dt, or svm.
    #[arg(long)]
    classifier: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print (or write) the default configuration with every tunable key.
    Config {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic labeled corpus with planted structure.
    Gen {
        #[arg(long)]
        out_dir: PathBuf,
        /// Corpus spec JSON; defaults to the standard spec.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n_docs: Option<usize>,
        /// Disable all layout and text noise.
        #[arg(long)]
        zero_noise: bool,
        /// Output format: csv, tetml, or both.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Parse a positional-text file into line records.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// tetml or csv; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<String>,
        /// Bookmark JSON used to label lines.
        #[arg(long)]
        toc: Option<PathBuf>,
        /// Similarity threshold for bookmark matching.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the unmatched-bookmark diagnostics JSON.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Fit and export the header vocabulary and n-gram vectorizer.
    Featurize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Stoplist file (one word per line); bundled default when omitted.
        #[arg(long)]
        stoplist: Option<PathBuf>,
    },
    /// Train a classifier bundle for one task.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// line, level, four, or semantic.
        #[arg(long, default_value = "line")]
        task: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained bundle, or run cross-validation.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// Trained bundle to evaluate on the corpus.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Run k-fold cross-validation instead of bundle evaluation.
        #[arg(long)]
        cv: bool,
        #[arg(long, default_value = "line")]
        task: String,
        #[command(flatten)]
        model_args: ModelArgs,
        /// Write the evaluation report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the section structure and TOC of one document.
    Structure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        format: Option<String>,
        /// Use ground-truth labels instead of models.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        line_model: Option<PathBuf>,
        #[arg(long)]
        level_model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the TOC as indented plain text.
        #[arg(long)]
        toc_out: Option<PathBuf>,
    },
    /// Assign ontology classes and emit annotation triples.
    Semantics {
        /// Source document (line CSV) backing the structure file.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        structure: Option<PathBuf>,
        /// Ontology JSON; defaults to the built-in scholarly ontology.
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long)]
        semantic_model: Option<PathBuf>,
        /// Annotation triples output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rewrite the structure JSON with assigned classes.
        #[arg(long)]
        update_structure: bool,
        /// Write the built-in ontology (classes + alias map) and exit.
        #[arg(long)]
        dump_ontology: Option<PathBuf>,
        /// Fit a section-sequence model over a labeled corpus and write it.
        #[arg(long)]
        fit_sequence: Option<PathBuf>,
        /// Labeled corpus for --fit-sequence.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Train an LDA topic model over the sections of a labeled corpus.
    Topics {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k_topics: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// words, bigrams, or phrases.
        #[arg(long)]
        token_mode: Option<String>,
        #[arg(long)]
        min_sections: Option<usize>,
        #[arg(long)]
        max_fraction: Option<f64>,
        /// Top terms per topic in the printed table.
        #[arg(long, default_value_t = 5)]
        top_terms: usize,
        /// Run the half-split similarity evaluation with this many chunks.
        #[arg(long)]
        half_split_chunks: Option<usize>,
    },
    /// Attach extractive summaries to a structure file.
    Summarize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        ratio: Option<f64>,
        /// Output structure path; defaults to rewriting in place.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: ingest, classify, segment, annotate, summarize.
    Pipeline {
        /// Corpus file or directory (line CSV or TETML).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Use ground-truth labels instead of the line/level models.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        line_model: Option<PathBuf>,
        #[arg(long)]
        level_model: Option<PathBuf>,
        #[arg(long)]
        semantic_model: Option<PathBuf>,
        /// Pre-trained topic model; trained on the corpus when omitted.
        #[arg(long)]
        topic_model: Option<PathBuf>,
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long)]
        ratio: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => return usage_error(&format!("{e:#}")),
        },
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }

    match commands::run(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::AppError::Usage(message)) => usage_error(&message),
        Err(commands::AppError::Data(error)) => {
            let diagnostic = serde_json::json!({
                "error": format!("{error:#}"),
                "kind": "data",
            });
            eprintln!("{diagnostic}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}
