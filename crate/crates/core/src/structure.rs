//! Document structure recovery: line classification, header-level
//! classification, stack-based section boundary detection, and TOC output.

use crate::error::{Error, Result};
use crate::featurize::{
    combine, extract_layout_features, FeatureVector, HeaderVocabulary, LineContext,
    NgramVectorizer,
};
use crate::ingest::{Document, LineRecord};
use crate::learn::{predict, Model};
use serde::{Deserialize, Serialize};

/// The three input-vector modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorMode {
    Layout,
    Text,
    Combined,
}

impl std::str::FromStr for VectorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "layout" => Ok(VectorMode::Layout),
            "text" => Ok(VectorMode::Text),
            "combined" => Ok(VectorMode::Combined),
            other => Err(Error::Contract(format!(
                "unknown vector mode {other:?} (expected layout, text, or combined)"
            ))),
        }
    }
}

impl std::fmt::Display for VectorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VectorMode::Layout => "layout",
            VectorMode::Text => "text",
            VectorMode::Combined => "combined",
        };
        f.write_str(s)
    }
}

/// Everything needed to turn document lines into feature vectors of one
/// mode: the header vocabulary and, for text-bearing modes, the fitted
/// n-gram vectorizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub mode: VectorMode,
    pub vocab: HeaderVocabulary,
    pub vectorizer: Option<NgramVectorizer>,
}

impl FeaturePipeline {
    pub fn new(
        mode: VectorMode,
        vocab: HeaderVocabulary,
        vectorizer: Option<NgramVectorizer>,
    ) -> Result<Self> {
        if mode != VectorMode::Layout && vectorizer.is_none() {
            return Err(Error::Contract(format!(
                "vector mode {mode} requires a fitted vectorizer"
            )));
        }
        Ok(FeaturePipeline {
            mode,
            vocab,
            vectorizer,
        })
    }

    /// Feature vectors for every line of `doc`, in reading order.
    /// `doc.pages` must be populated.
    pub fn features(&self, doc: &Document) -> Result<Vec<FeatureVector>> {
        doc.lines
            .iter()
            .enumerate()
            .map(|(i, line)| self.feature_for(doc, i, line))
            .collect()
    }

    fn feature_for(&self, doc: &Document, index: usize, line: &LineRecord) -> Result<FeatureVector> {
        let layout = || -> Result<FeatureVector> {
            let stats = doc.page_stats(line.page_number).ok_or_else(|| {
                Error::Contract(format!(
                    "page {} has no statistics; run compute_page_statistics",
                    line.page_number
                ))
            })?;
            let prev = index
                .checked_sub(1)
                .and_then(|i| doc.lines.get(i))
                .filter(|p| p.page_number == line.page_number);
            let next = doc
                .lines
                .get(index + 1)
                .filter(|n| n.page_number == line.page_number);
            Ok(extract_layout_features(
                line,
                LineContext { prev, next },
                stats,
                &self.vocab,
            ))
        };
        match self.mode {
            VectorMode::Layout => layout(),
            VectorMode::Text => {
                let v = self.vectorizer.as_ref().expect("checked in new()");
                Ok(FeatureVector::text_only(v.vectorize_text(&line.text)))
            }
            VectorMode::Combined => {
                let v = self.vectorizer.as_ref().expect("checked in new()");
                Ok(combine(layout()?, v.vectorize_text(&line.text)))
            }
        }
    }

    /// Feature vector for a standalone header line (no page context), used
    /// by the header-level classifier.
    pub fn header_feature(&self, doc: &Document, line_index: usize) -> Result<FeatureVector> {
        self.feature_for(doc, line_index, &doc.lines[line_index])
    }
}

/// Per-line binary decision with the classifier's scores, kept for
/// diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineDecision {
    pub is_header: bool,
    pub scores: Vec<f64>,
}

/// Classify every line of `doc` as section-header or regular-text.
/// The model must be binary with class alphabet {0, 1}.
pub fn classify_lines(
    doc: &Document,
    pipeline: &FeaturePipeline,
    model: &Model,
) -> Result<Vec<LineDecision>> {
    if model.class_alphabet != [0, 1] {
        return Err(Error::Contract(format!(
            "line classifier must have class alphabet [0, 1], got {:?}",
            model.class_alphabet
        )));
    }
    let features = pipeline.features(doc)?;
    features
        .iter()
        .map(|x| {
            let p = predict(model, x)?;
            Ok(LineDecision {
                is_header: p.label == 1,
                scores: p.scores,
            })
        })
        .collect()
}

/// Assign a level in {1, 2, 3} to each header line (indices into
/// `doc.lines`). The model must be 3-class with alphabet {1, 2, 3}.
pub fn classify_header_levels(
    doc: &Document,
    header_indices: &[usize],
    pipeline: &FeaturePipeline,
    model: &Model,
) -> Result<Vec<u32>> {
    if model.class_alphabet != [1, 2, 3] {
        return Err(Error::Contract(format!(
            "header-level classifier must have class alphabet [1, 2, 3], got {:?}",
            model.class_alphabet
        )));
    }
    header_indices
        .iter()
        .map(|&i| {
            let x = pipeline.header_feature(doc, i)?;
            Ok(predict(model, &x)?.label)
        })
        .collect()
}

/// A section: its header line, level, body lines, and nested children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionNode {
    pub header: LineRecord,
    /// Index of the header in the document's line order.
    pub header_line: usize,
    pub level: u32,
    pub body: Vec<usize>,
    pub children: Vec<SectionNode>,
    pub ontology_class: Option<String>,
    pub concepts: Option<Vec<String>>,
    pub summary: Option<String>,
}

impl SectionNode {
    fn new(header: LineRecord, header_line: usize, level: u32) -> Self {
        SectionNode {
            header,
            header_line,
            level,
            body: Vec::new(),
            children: Vec::new(),
            ontology_class: None,
            concepts: None,
            summary: None,
        }
    }

    /// Text of the section: header then body lines, joined by newlines.
    pub fn text(&self, doc: &Document) -> String {
        let mut out = self.header.text.clone();
        for &i in &self.body {
            out.push('\n');
            out.push_str(&doc.lines[i].text);
        }
        out
    }
}

/// The recovered tree of sections plus any preamble lines before the first
/// header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TocTree {
    pub doc_id: String,
    pub preamble: Vec<usize>,
    pub roots: Vec<SectionNode>,
}

impl TocTree {
    /// Depth-first, in-order iteration over all sections.
    pub fn sections(&self) -> Vec<&SectionNode> {
        fn walk<'a>(nodes: &'a [SectionNode], out: &mut Vec<&'a SectionNode>) {
            for n in nodes {
                out.push(n);
                walk(&n.children, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.roots, &mut out);
        out
    }

    /// Apply `f` to every section, depth-first in document order.
    pub fn for_each_section_mut(&mut self, f: &mut dyn FnMut(&mut SectionNode)) {
        fn walk(nodes: &mut [SectionNode], f: &mut dyn FnMut(&mut SectionNode)) {
            for n in nodes {
                f(n);
                walk(&mut n.children, f);
            }
        }
        walk(&mut self.roots, f);
    }

    pub fn section_count(&self) -> usize {
        self.sections().len()
    }

    /// Flatten the tree in order: preamble, then per section its header and
    /// body before its children. Body lines always precede a section's
    /// children (the boundary detector attaches later runs to the innermost
    /// open section), so this reproduces the exact input line sequence.
    pub fn line_ids_in_order(&self) -> Vec<usize> {
        let mut ids = self.preamble.clone();
        for s in self.sections() {
            ids.push(s.header_line);
            ids.extend(&s.body);
        }
        ids
    }
}

/// A labeled header position used by the boundary detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderAt {
    pub line_index: usize,
    pub level: u32,
}

/// Stack-based section boundary detection.
///
/// A header of level k closes all open sections of level >= k and opens a
/// new section under the nearest open ancestor of strictly smaller level
/// (or as a root). Body lines attach to the innermost open section; lines
/// before the first header form the preamble. Level jumps are allowed: a
/// level-3 header directly under a level-1 section becomes its child.
pub fn detect_section_boundaries(doc: &Document, headers: &[HeaderAt]) -> Result<TocTree> {
    let mut by_line = vec![None::<u32>; doc.lines.len()];
    for h in headers {
        if h.line_index >= doc.lines.len() {
            return Err(Error::Contract(format!(
                "header index {} out of range ({} lines)",
                h.line_index,
                doc.lines.len()
            )));
        }
        by_line[h.line_index] = Some(h.level);
    }

    let mut tree = TocTree {
        doc_id: doc.doc_id.clone(),
        preamble: Vec::new(),
        roots: Vec::new(),
    };
    // Open sections, outermost first; strictly increasing levels.
    let mut stack: Vec<SectionNode> = Vec::new();

    fn close_into(stack: &mut Vec<SectionNode>, roots: &mut Vec<SectionNode>) {
        let node = stack.pop().expect("close_into on nonempty stack");
        match stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None => roots.push(node),
        }
    }

    for (i, line) in doc.lines.iter().enumerate() {
        match by_line[i] {
            Some(level) => {
                while stack.last().is_some_and(|open| open.level >= level) {
                    close_into(&mut stack, &mut tree.roots);
                }
                stack.push(SectionNode::new(line.clone(), i, level));
            }
            None => match stack.last_mut() {
                Some(open) => open.body.push(i),
                None => tree.preamble.push(i),
            },
        }
    }
    while !stack.is_empty() {
        close_into(&mut stack, &mut tree.roots);
    }

    debug_assert_eq!(tree.line_ids_in_order(), (0..doc.lines.len()).collect::<Vec<_>>());
    Ok(tree)
}

/// One TOC listing entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TocEntry {
    pub title: String,
    pub level: u32,
    pub page: u32,
}

/// Pre-order TOC listing; numbering prefixes stay verbatim in titles.
pub fn build_toc(tree: &TocTree) -> Vec<TocEntry> {
    tree.sections()
        .into_iter()
        .map(|s| TocEntry {
            title: s.header.text.clone(),
            level: s.level,
            page: s.header.page_number,
        })
        .collect()
}

/// Indented plain-text rendering of the TOC.
pub fn toc_to_text(entries: &[TocEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let indent = "  ".repeat((e.level.max(1) - 1) as usize);
        out.push_str(&format!("{indent}{}  (p. {})\n", e.title, e.page));
    }
    out
}

/// Headers taken from ground-truth labels (label >= 1), bypassing models.
pub fn oracle_headers(doc: &Document) -> Vec<HeaderAt> {
    doc.lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l.label {
            Some(level) if level >= 1 => Some(HeaderAt {
                line_index: i,
                level,
            }),
            _ => None,
        })
        .collect()
}

/// Line-conservation check: every line appears exactly once across preamble,
/// headers, and bodies.
pub fn check_line_conservation(doc: &Document, tree: &TocTree) -> bool {
    tree.line_ids_in_order() == (0..doc.lines.len()).collect::<Vec<_>>()
}

// ---------------------------------------------------------------------------
// Structure JSON (external interface)

/// Serialized form of a [`TocTree`]: header text plus line ids, so the
/// structure file stands alone without the source document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureDoc {
    pub doc_id: String,
    pub preamble: Vec<usize>,
    pub sections: Vec<StructureSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureSection {
    pub header: String,
    pub header_line: usize,
    pub level: u32,
    pub page: u32,
    pub body_line_ids: Vec<usize>,
    pub children: Vec<StructureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontology_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl StructureDoc {
    pub fn from_tree(tree: &TocTree) -> Self {
        fn convert(n: &SectionNode) -> StructureSection {
            StructureSection {
                header: n.header.text.clone(),
                header_line: n.header_line,
                level: n.level,
                page: n.header.page_number,
                body_line_ids: n.body.clone(),
                children: n.children.iter().map(convert).collect(),
                ontology_class: n.ontology_class.clone(),
                concepts: n.concepts.clone(),
                summary: n.summary.clone(),
            }
        }
        StructureDoc {
            doc_id: tree.doc_id.clone(),
            preamble: tree.preamble.clone(),
            sections: tree.roots.iter().map(convert).collect(),
        }
    }

    /// Rebuild a tree against its source document.
    pub fn to_tree(&self, doc: &Document) -> Result<TocTree> {
        fn convert(s: &StructureSection, doc: &Document) -> Result<SectionNode> {
            let header = doc
                .lines
                .get(s.header_line)
                .ok_or_else(|| {
                    Error::Schema(format!(
                        "structure refers to line {} beyond document end",
                        s.header_line
                    ))
                })?
                .clone();
            Ok(SectionNode {
                header,
                header_line: s.header_line,
                level: s.level,
                body: s.body_line_ids.clone(),
                children: s
                    .children
                    .iter()
                    .map(|c| convert(c, doc))
                    .collect::<Result<_>>()?,
                ontology_class: s.ontology_class.clone(),
                concepts: s.concepts.clone(),
                summary: s.summary.clone(),
            })
        }
        Ok(TocTree {
            doc_id: self.doc_id.clone(),
            preamble: self.preamble.clone(),
            roots: self
                .sections
                .iter()
                .map(|s| convert(s, doc))
                .collect::<Result<_>>()?,
        })
    }
}
