//! The full document pipeline: ingest, line/level classification (or
//! oracle labels), boundary detection, ontology labeling, topic concepts,
//! extractive summaries, and the per-document output files.

use crate::commands::{bundle_to_semantic_classifier, corpus_sections, AppError};
use crate::config::Config;
use crate::io::load_corpus;
use anyhow::Context;
use docstruct_core::experiment::TrainedBundle;
use docstruct_core::jsonio;
use docstruct_core::semantics::{
    assign_ontology_classes, emit_ontology_annotation, triples_to_text, OntologyClassSet,
};
use docstruct_core::structure::{
    build_toc, check_line_conservation, classify_header_levels, classify_lines,
    detect_section_boundaries, oracle_headers, toc_to_text, HeaderAt, StructureDoc, TocTree,
};
use docstruct_core::summarize::summarize_section;
use docstruct_core::topics::{build_dictionary, semantic_concepts, section_tokens, train_lda, TopicModel};
use docstruct_core::Document;
use rayon::prelude::*;
use std::path::Path;

/// Classify lines and levels with trained bundles, then build the tree.
pub fn recover_tree(
    doc: &Document,
    line_bundle: &TrainedBundle,
    level_bundle: &TrainedBundle,
) -> Result<TocTree, docstruct_core::Error> {
    let decisions = classify_lines(doc, &line_bundle.pipeline, &line_bundle.model)?;
    let header_indices: Vec<usize> = decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_header)
        .map(|(i, _)| i)
        .collect();
    let levels = classify_header_levels(
        doc,
        &header_indices,
        &level_bundle.pipeline,
        &level_bundle.model,
    )?;
    let headers: Vec<HeaderAt> = header_indices
        .iter()
        .zip(&levels)
        .map(|(&line_index, &level)| HeaderAt { line_index, level })
        .collect();
    detect_section_boundaries(doc, &headers)
}

pub fn load_topic_model(path: &Path) -> Result<TopicModel, AppError> {
    let mut f = std::fs::File::open(path)
        .with_context(|| format!("opening topic model {}", path.display()))
        .map_err(AppError::Data)?;
    Ok(TopicModel::load(&mut f)?)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_pipeline(
    config: &Config,
    input: &Path,
    out_dir: &Path,
    oracle: bool,
    line_model: Option<&Path>,
    level_model: Option<&Path>,
    semantic_model: Option<&Path>,
    topic_model: Option<&Path>,
    ontology: Option<&Path>,
    ratio: Option<f64>,
) -> Result<(), AppError> {
    if !input.exists() {
        return Err(AppError::Usage(format!("input not found: {}", input.display())));
    }
    let models = if oracle {
        None
    } else {
        let line_path = line_model.ok_or_else(|| {
            AppError::Usage("missing --line-model (or pass --oracle)".into())
        })?;
        let level_path = level_model.ok_or_else(|| {
            AppError::Usage("missing --level-model (or pass --oracle)".into())
        })?;
        for (p, what) in [(line_path, "line model"), (level_path, "level model")] {
            if !p.exists() {
                return Err(AppError::Usage(format!("{what} not found: {}", p.display())));
            }
        }
        Some((
            TrainedBundle::load_from_path(line_path)?,
            TrainedBundle::load_from_path(level_path)?,
        ))
    };
    let ont: OntologyClassSet = match ontology {
        Some(p) => {
            let loaded: OntologyClassSet = jsonio::read_json_file(p)?;
            loaded.validate()?;
            loaded
        }
        None => OntologyClassSet::arxiv_default(),
    };
    let semantic = match semantic_model {
        Some(p) => {
            if !p.exists() {
                return Err(AppError::Usage(format!(
                    "semantic model not found: {}",
                    p.display()
                )));
            }
            Some(bundle_to_semantic_classifier(
                TrainedBundle::load_from_path(p)?,
                config,
            )?)
        }
        None => None,
    };
    let ratio = ratio.unwrap_or(config.summary_ratio);

    let docs = load_corpus(input).map_err(AppError::Data)?;
    // Topic model: load, or train on this corpus's sections.
    let topics = match topic_model {
        Some(p) => load_topic_model(p)?,
        None => {
            let sections = corpus_sections(&docs, config.token_mode)?;
            let dictionary = build_dictionary(
                &sections,
                config.lda_min_sections,
                config.lda_max_fraction,
                config.lda_cap,
            )?;
            train_lda(
                &sections,
                dictionary,
                config.k_topics,
                config.lda_alpha_value(),
                config.lda_beta,
                config.lda_iterations,
                config.seed,
            )?
        }
    };

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(AppError::Data)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| AppError::Data(e.into()))?;
    let results: Result<Vec<(String, TocTree, Document)>, docstruct_core::Error> =
        pool.install(|| {
            docs.into_par_iter()
                .map(|doc| {
                    let mut tree = match &models {
                        Some((line_bundle, level_bundle)) => {
                            recover_tree(&doc, line_bundle, level_bundle)?
                        }
                        None => detect_section_boundaries(&doc, &oracle_headers(&doc))?,
                    };
                    if !check_line_conservation(&doc, &tree) {
                        return Err(docstruct_core::Error::Data(format!(
                            "line conservation violated for {}",
                            doc.doc_id
                        )));
                    }
                    assign_ontology_classes(&mut tree, &doc, &ont, semantic.as_ref())?;

                    // Concepts and summaries per section, deterministic
                    // seeding by section order.
                    let mut failure: Option<docstruct_core::Error> = None;
                    let mut section_index = 0u64;
                    tree.for_each_section_mut(&mut |section| {
                        if failure.is_some() {
                            return;
                        }
                        let text = section_text_of(section, &doc);
                        let tokens = section_tokens(&text, config.token_mode);
                        let concepts = semantic_concepts(
                            &topics,
                            &tokens,
                            config.concepts_per_section,
                            config.lda_infer_iterations,
                            config.seed ^ section_index,
                        );
                        section.concepts = Some(concepts);
                        match summarize_section(&text, ratio) {
                            Ok(summary) => section.summary = Some(summary),
                            Err(e) => failure = Some(e),
                        }
                        section_index += 1;
                    });
                    if let Some(e) = failure {
                        return Err(e);
                    }
                    let id = doc.doc_id.clone();
                    Ok((id, tree, doc))
                })
                .collect()
        });
    let mut results = results?;
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut manifest = Vec::new();
    for (id, tree, _doc) in &results {
        jsonio::write_json_file(
            &out_dir.join(format!("{id}.structure.json")),
            &StructureDoc::from_tree(tree),
        )?;
        let toc = build_toc(tree);
        std::fs::write(out_dir.join(format!("{id}.toc.txt")), toc_to_text(&toc))
            .map_err(|e| AppError::Data(e.into()))?;
        let triples = emit_ontology_annotation(tree, &ont);
        std::fs::write(
            out_dir.join(format!("{id}.triples.nt")),
            triples_to_text(&triples),
        )
        .map_err(|e| AppError::Data(e.into()))?;
        manifest.push(serde_json::json!({
            "doc_id": id,
            "sections": tree.section_count(),
            "preamble_lines": tree.preamble.len(),
        }));
    }
    jsonio::write_json_file(&out_dir.join("manifest.json"), &manifest)?;
    println!("pipeline wrote {} documents -> {}", results.len(), out_dir.display());
    Ok(())
}

fn section_text_of(section: &docstruct_core::SectionNode, doc: &Document) -> String {
    section.text(doc)
}
