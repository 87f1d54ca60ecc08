//! Subcommand implementations.

use crate::config::Config;
use crate::io::{detect_format, load_bookmarks, load_corpus, parse_file};
use crate::{Command, ModelArgs};
use anyhow::{anyhow, Context};
use docstruct_core::corpus::map_bookmarks_to_labels;
use docstruct_core::experiment::{
    cross_validate, evaluate_bundle, train_bundle, Task, TrainedBundle,
};
use docstruct_core::featurize::{build_header_vocabulary, fit_ngram_vectorizer, DEFAULT_STOPLIST};
use docstruct_core::ingest::{save_line_records_to_path, save_tetml};
use docstruct_core::jsonio;
use docstruct_core::learn::{Classifier, EvalReport};
use docstruct_core::semantics::{
    assign_ontology_classes, emit_ontology_annotation, fit_sequence_model, map_header_to_class,
    triples_to_text, OntologyClassSet, SemanticClassifier,
};
use docstruct_core::structure::{
    detect_section_boundaries, oracle_headers, StructureDoc, VectorMode,
};
use docstruct_core::summarize::summarize_section;
use docstruct_core::synthgen::{generate_corpus, CorpusSpec};
use docstruct_core::topics::{
    build_dictionary, half_split_similarity_eval, section_tokens, train_lda, TokenMode,
};
use std::path::Path;

/// Usage problems exit 2; data problems exit 1 with a JSON diagnostic.
pub enum AppError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for AppError {
    fn from(e: anyhow::Error) -> Self {
        AppError::Data(e)
    }
}

impl From<docstruct_core::Error> for AppError {
    fn from(e: docstruct_core::Error) -> Self {
        AppError::Data(e.into())
    }
}

type CmdResult = std::result::Result<(), AppError>;

fn require_exists(path: &Path, what: &str) -> std::result::Result<(), AppError> {
    if path.exists() {
        Ok(())
    } else {
        Err(AppError::Usage(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}

fn required<T>(value: Option<T>, flag: &str) -> std::result::Result<T, AppError> {
    value.ok_or_else(|| AppError::Usage(format!("missing required flag {flag}")))
}

pub fn run(command: Command, config: &Config) -> CmdResult {
    match command {
        Command::Config { out } => cmd_config(config, out.as_deref()),
        Command::Gen {
            out_dir,
            spec,
            n_docs,
            zero_noise,
            format,
        } => cmd_gen(config, &out_dir, spec.as_deref(), n_docs, zero_noise, &format),
        Command::Ingest {
            input,
            format,
            toc,
            threshold,
            out,
            diagnostics,
        } => cmd_ingest(
            config,
            &input,
            format.as_deref(),
            toc.as_deref(),
            threshold,
            &out,
            diagnostics.as_deref(),
        ),
        Command::Featurize {
            corpus,
            out_dir,
            stoplist,
        } => cmd_featurize(config, &corpus, &out_dir, stoplist.as_deref()),
        Command::Train {
            corpus,
            task,
            model,
            out,
        } => cmd_train(config, &corpus, &task, &model, &out),
        Command::Eval {
            corpus,
            model,
            cv,
            task,
            model_args,
            out,
        } => cmd_eval(config, &corpus, model.as_deref(), cv, &task, &model_args, out.as_deref()),
        Command::Structure {
            input,
            format,
            oracle,
            line_model,
            level_model,
            out,
            toc_out,
        } => cmd_structure(
            config,
            &input,
            format.as_deref(),
            oracle,
            line_model.as_deref(),
            level_model.as_deref(),
            &out,
            toc_out.as_deref(),
        ),
        Command::Semantics {
            input,
            structure,
            ontology,
            semantic_model,
            out,
            update_structure,
            dump_ontology,
            fit_sequence,
            corpus,
        } => cmd_semantics(
            config,
            input.as_deref(),
            structure.as_deref(),
            ontology.as_deref(),
            semantic_model.as_deref(),
            out.as_deref(),
            update_structure,
            dump_ontology.as_deref(),
            fit_sequence.as_deref(),
            corpus.as_deref(),
        ),
        Command::Topics {
            corpus,
            out,
            k_topics,
            iterations,
            token_mode,
            min_sections,
            max_fraction,
            top_terms,
            half_split_chunks,
        } => cmd_topics(
            config,
            &corpus,
            &out,
            k_topics,
            iterations,
            token_mode.as_deref(),
            min_sections,
            max_fraction,
            top_terms,
            half_split_chunks,
        ),
        Command::Summarize {
            input,
            structure,
            ratio,
            out,
        } => cmd_summarize(config, &input, &structure, ratio, out.as_deref()),
        Command::Pipeline {
            input,
            out_dir,
            oracle,
            line_model,
            level_model,
            semantic_model,
            topic_model,
            ontology,
            ratio,
        } => crate::pipeline::cmd_pipeline(
            config,
            &input,
            &out_dir,
            oracle,
            line_model.as_deref(),
            level_model.as_deref(),
            semantic_model.as_deref(),
            topic_model.as_deref(),
            ontology.as_deref(),
            ratio,
        ),
    }
}

fn cmd_config(config: &Config, out: Option<&Path>) -> CmdResult {
    let text = config.to_text();
    match out {
        Some(path) => {
            std::fs::write(path, &text)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(AppError::Data)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(
    config: &Config,
    out_dir: &Path,
    spec_path: Option<&Path>,
    n_docs: Option<usize>,
    zero_noise: bool,
    format: &str,
) -> CmdResult {
    let mut spec: CorpusSpec = match spec_path {
        Some(p) => {
            require_exists(p, "corpus spec")?;
            jsonio::read_json_file(p)?
        }
        None => CorpusSpec {
            seed: config.seed,
            ..CorpusSpec::default()
        },
    };
    if let Some(n) = n_docs {
        spec.n_docs = n;
    }
    if zero_noise {
        spec = spec.without_noise();
    }
    let (csv, tetml) = match format {
        "csv" => (true, false),
        "tetml" => (false, true),
        "both" => (true, true),
        other => return Err(AppError::Usage(format!("unknown gen format {other:?}"))),
    };

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(AppError::Data)?;
    let docs = generate_corpus(&spec)?;
    jsonio::write_json_file(&out_dir.join("corpus_spec.json"), &spec)?;
    for doc in &docs {
        if csv {
            save_line_records_to_path(doc, &out_dir.join(format!("{}.csv", doc.doc_id)))?;
        }
        if tetml {
            let mut f = std::fs::File::create(out_dir.join(format!("{}.tetml", doc.doc_id)))
                .map_err(|e| AppError::Data(e.into()))?;
            save_tetml(doc, &mut f)?;
        }
        jsonio::write_json_file(
            &out_dir.join(format!("{}.toc.json", doc.doc_id)),
            doc.toc.as_ref().expect("generated docs carry bookmarks"),
        )?;
    }
    println!("generated {} documents under {}", docs.len(), out_dir.display());
    Ok(())
}

fn cmd_ingest(
    config: &Config,
    input: &Path,
    format: Option<&str>,
    toc: Option<&Path>,
    threshold: Option<f64>,
    out: &Path,
    diagnostics: Option<&Path>,
) -> CmdResult {
    require_exists(input, "input")?;
    let format = detect_format(input, format).map_err(AppError::Data)?;
    let mut doc = parse_file(input, format).map_err(AppError::Data)?;
    if let Some(toc_path) = toc {
        require_exists(toc_path, "bookmark file")?;
        doc.toc = Some(load_bookmarks(toc_path).map_err(AppError::Data)?);
    }
    let mut report = None;
    if doc.toc.is_some() {
        let diag = map_bookmarks_to_labels(&mut doc, threshold.unwrap_or(config.similarity_threshold))?;
        report = Some(diag);
    }
    save_line_records_to_path(&doc, out)?;
    if let (Some(path), Some(diag)) = (diagnostics, report.as_ref()) {
        jsonio::write_json_file(path, diag)?;
    }
    println!(
        "ingested {} lines over {} pages -> {}",
        doc.lines.len(),
        doc.pages.len(),
        out.display()
    );
    if let Some(diag) = report {
        if !diag.unmatched_entries.is_empty() {
            eprintln!("{} bookmark(s) unmatched", diag.unmatched_entries.len());
        }
    }
    Ok(())
}

fn cmd_featurize(
    config: &Config,
    corpus: &Path,
    out_dir: &Path,
    stoplist: Option<&Path>,
) -> CmdResult {
    require_exists(corpus, "corpus")?;
    let docs = load_corpus(corpus).map_err(AppError::Data)?;
    let headers: Vec<String> = docs
        .iter()
        .flat_map(|d| d.lines.iter())
        .filter(|l| l.label.is_some_and(|x| x >= 1))
        .map(|l| l.text.clone())
        .collect();
    let stop = match stoplist {
        Some(p) => {
            require_exists(p, "stoplist")?;
            docstruct_core::featurize::load_stoplist(p)?
        }
        None => DEFAULT_STOPLIST.clone(),
    };
    let vocab = build_header_vocabulary(&headers, config.vocab_min_frequency, &stop);
    let texts: Vec<String> = docs
        .iter()
        .flat_map(|d| d.lines.iter())
        .map(|l| l.text.clone())
        .collect();
    let vectorizer = fit_ngram_vectorizer(&texts, config.ngram_min, config.ngram_max, config.min_df);
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Data(e.into()))?;
    jsonio::write_json_file(&out_dir.join("vocab.json"), &vocab)?;
    jsonio::write_json_file(&out_dir.join("vectorizer.json"), &vectorizer)?;
    println!(
        "vocabulary: {} terms; vectorizer: {} n-grams over {} lines",
        vocab.terms.len(),
        vectorizer.len(),
        texts.len()
    );
    Ok(())
}

fn parse_task(task: &str) -> std::result::Result<Task, AppError> {
    task.parse::<Task>()
        .map_err(|e| AppError::Usage(e.to_string()))
}

fn mode_of(config: &Config, args: &ModelArgs, task: Task) -> std::result::Result<VectorMode, AppError> {
    if task == Task::Semantic {
        // The semantic classifier runs over section text n-grams.
        return Ok(VectorMode::Text);
    }
    match &args.mode {
        Some(m) => m
            .parse::<VectorMode>()
            .map_err(|e| AppError::Usage(e.to_string())),
        None => Ok(config.mode),
    }
}

fn classifier_of(
    config: &Config,
    args: &ModelArgs,
    task: Task,
) -> std::result::Result<Classifier, AppError> {
    match &args.classifier {
        Some(c) => c
            .parse::<Classifier>()
            .map_err(|e| AppError::Usage(e.to_string())),
        None if task == Task::Semantic => Ok(config.semantic_classifier),
        None => Ok(config.classifier),
    }
}

fn cmd_train(config: &Config, corpus: &Path, task: &str, args: &ModelArgs, out: &Path) -> CmdResult {
    require_exists(corpus, "corpus")?;
    let task = parse_task(task)?;
    let mode = mode_of(config, args, task)?;
    let classifier = classifier_of(config, args, task)?;
    let docs = load_corpus(corpus).map_err(AppError::Data)?;
    let ont = OntologyClassSet::arxiv_default();
    let bundle = train_bundle(
        task,
        mode,
        classifier,
        &docs,
        &ont,
        &config.feature_config(),
        &config.hyperparams(),
        config.seed,
    )?;
    bundle.save_to_path(out)?;
    println!(
        "trained {task} {classifier} ({mode}) on {} docs -> {}",
        docs.len(),
        out.display()
    );
    Ok(())
}

fn class_names_for(task: Task, ont: &OntologyClassSet, report: &EvalReport) -> Vec<String> {
    match task {
        Task::Line => vec!["Regular-Text".into(), "Section-Header".into()],
        Task::Level => vec!["Top-level".into(), "Subsection".into(), "Sub-subsection".into()],
        Task::FourClass => vec![
            "Regular-Text".into(),
            "Top-level".into(),
            "Subsection".into(),
            "Sub-subsection".into(),
        ],
        Task::Semantic => report
            .class_alphabet
            .iter()
            .map(|l| {
                ont.classes
                    .get(*l as usize)
                    .cloned()
                    .unwrap_or_else(|| format!("class-{l}"))
            })
            .collect(),
    }
}

fn cmd_eval(
    config: &Config,
    corpus: &Path,
    model: Option<&Path>,
    cv: bool,
    task: &str,
    args: &ModelArgs,
    out: Option<&Path>,
) -> CmdResult {
    require_exists(corpus, "corpus")?;
    let docs = load_corpus(corpus).map_err(AppError::Data)?;
    let ont = OntologyClassSet::arxiv_default();
    if cv {
        let task = parse_task(task)?;
        let mode = mode_of(config, args, task)?;
        let classifier = classifier_of(config, args, task)?;
        let report = cross_validate(
            task,
            mode,
            classifier,
            &docs,
            &ont,
            &config.feature_config(),
            &config.hyperparams(),
            config.folds,
            config.seed,
        )?;
        let names = class_names_for(task, &ont, &report.pooled);
        let pooled = report
            .pooled
            .clone()
            .with_class_names(&names.iter().map(String::as_str).collect::<Vec<_>>());
        println!(
            "{}-fold cross-validation, task {task}, {classifier} ({mode}):",
            config.folds
        );
        print!("{}", pooled.to_text_table());
        for (i, fold) in report.folds.iter().enumerate() {
            println!("fold {i}: macro F1 {:.4}", fold.macro_f1);
        }
        if let Some(path) = out {
            jsonio::write_json_file(path, &report)?;
        }
    } else {
        let model_path = required(model, "--model (or use --cv)")?;
        require_exists(model_path, "model")?;
        let bundle = TrainedBundle::load_from_path(model_path)?;
        let report = evaluate_bundle(&bundle, &docs, &ont, &config.feature_config())?;
        let names = class_names_for(bundle.task, &ont, &report);
        let report = report.with_class_names(&names.iter().map(String::as_str).collect::<Vec<_>>());
        print!("{}", report.to_text_table());
        if let Some(path) = out {
            jsonio::write_json_file(path, &report)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_structure(
    config: &Config,
    input: &Path,
    format: Option<&str>,
    oracle: bool,
    line_model: Option<&Path>,
    level_model: Option<&Path>,
    out: &Path,
    toc_out: Option<&Path>,
) -> CmdResult {
    require_exists(input, "input")?;
    let format = detect_format(input, format).map_err(AppError::Data)?;
    let doc = parse_file(input, format).map_err(AppError::Data)?;
    let tree = if oracle {
        detect_section_boundaries(&doc, &oracle_headers(&doc))?
    } else {
        let line_path = required(line_model, "--line-model (or --oracle)")?;
        let level_path = required(level_model, "--level-model (or --oracle)")?;
        require_exists(line_path, "line model")?;
        require_exists(level_path, "level model")?;
        let line_bundle = TrainedBundle::load_from_path(line_path)?;
        let level_bundle = TrainedBundle::load_from_path(level_path)?;
        crate::pipeline::recover_tree(&doc, &line_bundle, &level_bundle)?
    };
    let _ = config;
    jsonio::write_json_file(out, &StructureDoc::from_tree(&tree))?;
    if let Some(path) = toc_out {
        let toc = docstruct_core::structure::build_toc(&tree);
        std::fs::write(path, docstruct_core::structure::toc_to_text(&toc))
            .map_err(|e| AppError::Data(e.into()))?;
    }
    println!(
        "{}: {} sections, {} preamble lines -> {}",
        tree.doc_id,
        tree.section_count(),
        tree.preamble.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_semantics(
    config: &Config,
    input: Option<&Path>,
    structure: Option<&Path>,
    ontology: Option<&Path>,
    semantic_model: Option<&Path>,
    out: Option<&Path>,
    update_structure: bool,
    dump_ontology: Option<&Path>,
    fit_sequence: Option<&Path>,
    corpus: Option<&Path>,
) -> CmdResult {
    let ont: OntologyClassSet = match ontology {
        Some(p) => {
            require_exists(p, "ontology")?;
            let loaded: OntologyClassSet = jsonio::read_json_file(p)?;
            loaded.validate()?;
            loaded
        }
        None => OntologyClassSet::arxiv_default(),
    };
    if let Some(path) = dump_ontology {
        jsonio::write_json_file(path, &ont)?;
        println!("wrote ontology ({} classes) -> {}", ont.classes.len(), path.display());
        return Ok(());
    }
    if let Some(seq_out) = fit_sequence {
        let corpus_path = required(corpus, "--corpus (needed by --fit-sequence)")?;
        require_exists(corpus_path, "corpus")?;
        let docs = load_corpus(corpus_path).map_err(AppError::Data)?;
        let mut sequences = Vec::new();
        for doc in &docs {
            let tree = detect_section_boundaries(doc, &oracle_headers(doc))?;
            let seq: Vec<String> = tree
                .sections()
                .iter()
                .filter_map(|s| map_header_to_class(&s.header.text, &ont).map(str::to_string))
                .collect();
            if !seq.is_empty() {
                sequences.push(seq);
            }
        }
        let model = fit_sequence_model(ont.classes.clone(), &sequences, config.max_sequence_length)?;
        jsonio::write_json_file(seq_out, &model)?;
        println!(
            "fitted sequence model over {} documents -> {}",
            sequences.len(),
            seq_out.display()
        );
        return Ok(());
    }

    let input = required(input, "--input")?;
    let structure_path = required(structure, "--structure")?;
    require_exists(input, "input")?;
    require_exists(structure_path, "structure")?;
    let doc = parse_file(input, detect_format(input, None).map_err(AppError::Data)?)
        .map_err(AppError::Data)?;
    let sdoc: StructureDoc = jsonio::read_json_file(structure_path)?;
    let mut tree = sdoc.to_tree(&doc)?;

    let clf = match semantic_model {
        Some(p) => {
            require_exists(p, "semantic model")?;
            let bundle = TrainedBundle::load_from_path(p)?;
            Some(bundle_to_semantic_classifier(bundle, config)?)
        }
        None => None,
    };
    assign_ontology_classes(&mut tree, &doc, &ont, clf.as_ref())?;

    let triples = emit_ontology_annotation(&tree, &ont);
    match out {
        Some(path) => {
            std::fs::write(path, triples_to_text(&triples)).map_err(|e| AppError::Data(e.into()))?;
            println!("{} triples -> {}", triples.len(), path.display());
        }
        None => print!("{}", triples_to_text(&triples)),
    }
    if update_structure {
        jsonio::write_json_file(structure_path, &StructureDoc::from_tree(&tree))?;
    }
    Ok(())
}

pub fn bundle_to_semantic_classifier(
    bundle: TrainedBundle,
    config: &Config,
) -> std::result::Result<SemanticClassifier, AppError> {
    if bundle.task != Task::Semantic {
        return Err(AppError::Usage(
            "the --semantic-model bundle was not trained for the semantic task".into(),
        ));
    }
    let class_names = bundle
        .class_names
        .ok_or_else(|| AppError::Usage("semantic bundle lacks class names".into()))?;
    let vectorizer = bundle
        .pipeline
        .vectorizer
        .ok_or_else(|| AppError::Usage("semantic bundle lacks a vectorizer".into()))?;
    Ok(SemanticClassifier {
        model: bundle.model,
        vectorizer,
        class_names,
        truncation: config.truncation,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_topics(
    config: &Config,
    corpus: &Path,
    out: &Path,
    k_topics: Option<usize>,
    iterations: Option<usize>,
    token_mode: Option<&str>,
    min_sections: Option<usize>,
    max_fraction: Option<f64>,
    top_terms: usize,
    half_split_chunks: Option<usize>,
) -> CmdResult {
    require_exists(corpus, "corpus")?;
    let docs = load_corpus(corpus).map_err(AppError::Data)?;
    let token_mode = match token_mode {
        Some(m) => m
            .parse::<TokenMode>()
            .map_err(|e| AppError::Usage(e.to_string()))?,
        None => config.token_mode,
    };
    let sections = corpus_sections(&docs, token_mode)?;
    let k = k_topics.unwrap_or(config.k_topics);
    let dictionary = build_dictionary(
        &sections,
        min_sections.unwrap_or(config.lda_min_sections),
        max_fraction.unwrap_or(config.lda_max_fraction),
        config.lda_cap,
    )?;
    let model = train_lda(
        &sections,
        dictionary,
        k,
        config.lda_alpha_value(),
        config.lda_beta,
        iterations.unwrap_or(config.lda_iterations),
        config.seed,
    )?;
    let mut f = std::fs::File::create(out).map_err(|e| AppError::Data(e.into()))?;
    model.save(&mut f)?;

    println!(
        "trained LDA: {} sections, dictionary {} terms, K = {k}",
        sections.len(),
        model.dictionary.len()
    );
    println!("{:<6} {:<}", "topic", "top terms");
    for topic in 0..model.k {
        println!("{topic:<6} {}", model.top_terms(topic, top_terms).join(", "));
    }
    if let Some(chunks) = half_split_chunks {
        let report = half_split_similarity_eval(
            &model,
            &sections,
            chunks,
            config.lda_infer_iterations,
            config.seed,
        )?;
        println!("{:<6} {:>10} {:>10}", "chunk", "intra", "inter");
        for (i, (intra, inter)) in report.per_chunk.iter().enumerate() {
            println!("{i:<6} {intra:>10.4} {inter:>10.4}");
        }
        if report.skipped_short_sections > 0 {
            println!("skipped {} short section(s)", report.skipped_short_sections);
        }
    }
    Ok(())
}

/// Oracle sections of a labeled corpus, tokenized for topic modeling.
pub fn corpus_sections(
    docs: &[docstruct_core::Document],
    mode: TokenMode,
) -> std::result::Result<Vec<Vec<String>>, AppError> {
    let mut sections = Vec::new();
    for doc in docs {
        let tree = detect_section_boundaries(doc, &oracle_headers(doc))?;
        for section in tree.sections() {
            sections.push(section_tokens(&section.text(doc), mode));
        }
    }
    if sections.is_empty() {
        return Err(AppError::Data(anyhow!(
            "corpus has no labeled sections to model"
        )));
    }
    Ok(sections)
}

fn cmd_summarize(
    config: &Config,
    input: &Path,
    structure_path: &Path,
    ratio: Option<f64>,
    out: Option<&Path>,
) -> CmdResult {
    require_exists(input, "input")?;
    require_exists(structure_path, "structure")?;
    let ratio = ratio.unwrap_or(config.summary_ratio);
    let doc = parse_file(input, detect_format(input, None).map_err(AppError::Data)?)
        .map_err(AppError::Data)?;
    let sdoc: StructureDoc = jsonio::read_json_file(structure_path)?;
    let mut tree = sdoc.to_tree(&doc)?;
    let mut failure = None;
    tree.for_each_section_mut(&mut |section| {
        if failure.is_some() {
            return;
        }
        match summarize_section(&section.text(&doc), ratio) {
            Ok(summary) => section.summary = Some(summary),
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(AppError::Data(e.into()));
    }
    let target = out.unwrap_or(structure_path);
    jsonio::write_json_file(target, &StructureDoc::from_tree(&tree))?;
    println!(
        "summarized {} sections at ratio {ratio} -> {}",
        tree.section_count(),
        target.display()
    );
    Ok(())
}

