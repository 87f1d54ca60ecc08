//! Corpus and document I/O helpers shared by the subcommands.

use anyhow::{bail, Context, Result};
use docstruct_core::ingest::{
    compute_page_statistics, load_corpus_csv_path, parse_positional_document, BookmarkEntry,
    Document, InputFormat,
};
use docstruct_core::jsonio;
use std::path::{Path, PathBuf};

/// Load a labeled (or unlabeled) corpus from a CSV file or a directory of
/// CSV files. Directory entries are read in sorted order; `*.tetml` files
/// are parsed as TETML with an optional `{stem}.toc.json` bookmark sidecar.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("reading corpus directory {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("csv") | Some("tetml")
                )
            })
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no .csv or .tetml files under {}", path.display());
        }
        let mut docs = Vec::new();
        for file in files {
            docs.extend(load_one(&file)?);
        }
        Ok(docs)
    } else {
        load_one(path)
    }
}

fn load_one(path: &Path) -> Result<Vec<Document>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tetml") => {
            let doc = parse_file(path, InputFormat::Tetml)?;
            Ok(vec![doc])
        }
        _ => Ok(load_corpus_csv_path(path)?),
    }
}

/// Parse one positional-text file; TETML picks up a `{stem}.toc.json`
/// bookmark sidecar when present.
pub fn parse_file(path: &Path, format: InputFormat) -> Result<Document> {
    let doc_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("document")
        .to_string();
    let mut file = std::fs::File::open(path)
        .with_context(|| format!("opening input {}", path.display()))?;
    let mut doc = parse_positional_document(&mut file, format, &doc_id)?;
    compute_page_statistics(&mut doc);
    if doc.toc.is_none() {
        let sidecar = path.with_extension("toc.json");
        if sidecar.exists() {
            doc.toc = Some(load_bookmarks(&sidecar)?);
        }
    }
    Ok(doc)
}

pub fn load_bookmarks(path: &Path) -> Result<Vec<BookmarkEntry>> {
    Ok(jsonio::read_json_file(path)?)
}

pub fn detect_format(path: &Path, flag: Option<&str>) -> Result<InputFormat> {
    match flag {
        Some("tetml") => Ok(InputFormat::Tetml),
        Some("csv") | Some("line_csv") => Ok(InputFormat::LineCsv),
        Some(other) => bail!("unknown input format {other:?} (expected tetml or csv)"),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("tetml") | Some("xml") => Ok(InputFormat::Tetml),
            _ => Ok(InputFormat::LineCsv),
        },
    }
}
