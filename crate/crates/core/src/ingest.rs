//! Positional-text ingestion.
//!
//! Two input formats produce the same in-memory [`Document`]:
//!
//! * a TETML-like XML subset (`Page` / `Para` / `Word` / `Glyph` elements,
//!   word-level granularity with per-character glyph boxes), and
//! * a flat line-record CSV (one assembled line per row).
//!
//! Axis convention: after parsing, y grows downward — the top edge of a page
//! is y = 0 and `y_top <= y_bottom` for every line. The baseline of a line is
//! its `y_bottom`. Reading order is `(page_number, baseline, x_left)` and
//! `Document::lines` is always sorted that way.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

/// One assembled text line with its layout attributes. The atom of the
/// pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub text: String,
    pub page_number: u32,
    /// Most frequent glyph font size on the line, in points.
    pub font_size: f64,
    /// Numeric weight: 400 regular, 700 bold.
    pub font_weight: f64,
    pub font_family: String,
    pub x_left: f64,
    pub x_right: f64,
    pub y_top: f64,
    pub y_bottom: f64,
    pub page_width: f64,
    pub page_height: f64,
    /// 0 = regular text, k >= 1 = section header at TOC depth k.
    pub label: Option<u32>,
}

impl LineRecord {
    /// Baseline used for reading order and line-spacing computation.
    pub fn baseline(&self) -> f64 {
        self.y_bottom
    }

    // Negated comparisons are deliberate: NaN coordinates must fail.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.x_left <= self.x_right) {
            return Err(Error::Schema(format!(
                "line {:?}: x_left {} > x_right {}",
                self.text, self.x_left, self.x_right
            )));
        }
        if !(self.y_top <= self.y_bottom) {
            return Err(Error::Schema(format!(
                "line {:?}: y_top {} > y_bottom {}",
                self.text, self.y_top, self.y_bottom
            )));
        }
        if !(self.font_size > 0.0) || !self.font_size.is_finite() {
            return Err(Error::Schema(format!(
                "line {:?}: font_size must be positive, got {}",
                self.text, self.font_size
            )));
        }
        if !(self.page_width > 0.0) || !(self.page_height > 0.0) {
            return Err(Error::Schema(format!(
                "line {:?}: page dimensions must be positive",
                self.text
            )));
        }
        Ok(())
    }
}

/// Per-page layout averages, the reference frame for "higher than average"
/// layout features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageStats {
    pub page_number: u32,
    pub avg_font_size: f64,
    pub avg_font_weight: f64,
    /// Mean gap between consecutive baselines; 0 for single-line pages.
    pub avg_line_spacing: f64,
    pub avg_indentation: f64,
}

/// A TOC bookmark: title, 1-based depth, and position in the bookmark list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookmarkEntry {
    pub title: String,
    pub depth: u32,
    pub order: u32,
}

/// A parsed document: lines in reading order plus per-page statistics and
/// optional bookmark annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub lines: Vec<LineRecord>,
    pub pages: Vec<PageStats>,
    pub toc: Option<Vec<BookmarkEntry>>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            lines: Vec::new(),
            pages: Vec::new(),
            toc: None,
        }
    }

    /// Stats for one page, if computed.
    pub fn page_stats(&self, page_number: u32) -> Option<&PageStats> {
        self.pages.iter().find(|p| p.page_number == page_number)
    }

    /// Sort lines into reading order: (page, baseline, x_left).
    pub fn sort_reading_order(&mut self) {
        self.lines.sort_by(|a, b| {
            a.page_number
                .cmp(&b.page_number)
                .then(a.baseline().total_cmp(&b.baseline()))
                .then(a.x_left.total_cmp(&b.x_left))
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Tetml,
    LineCsv,
}

/// Parse a positional-text document. `doc_id` names the document for TETML
/// input; line-CSV rows carry their own `doc_id` column which takes
/// precedence (and must be uniform).
pub fn parse_positional_document(
    input: &mut dyn Read,
    format: InputFormat,
    doc_id: &str,
) -> Result<Document> {
    match format {
        InputFormat::Tetml => tetml::parse(input, doc_id),
        InputFormat::LineCsv => load_line_records(input),
    }
}

/// Populate `doc.pages` from the current lines. Idempotent: recomputes all
/// averages from scratch. Pages appear in ascending page-number order.
pub fn compute_page_statistics(doc: &mut Document) {
    let mut by_page: Vec<(u32, Vec<&LineRecord>)> = Vec::new();
    for line in &doc.lines {
        match by_page.iter_mut().find(|(p, _)| *p == line.page_number) {
            Some((_, v)) => v.push(line),
            None => by_page.push((line.page_number, vec![line])),
        }
    }
    by_page.sort_by_key(|(p, _)| *p);

    let mut pages = Vec::with_capacity(by_page.len());
    for (page_number, lines) in by_page {
        let n = lines.len() as f64;
        let avg_font_size = lines.iter().map(|l| l.font_size).sum::<f64>() / n;
        let avg_font_weight = lines.iter().map(|l| l.font_weight).sum::<f64>() / n;
        let avg_indentation = lines.iter().map(|l| l.x_left).sum::<f64>() / n;
        let avg_line_spacing = if lines.len() < 2 {
            0.0
        } else {
            let gaps: f64 = lines
                .windows(2)
                .map(|w| (w[1].baseline() - w[0].baseline()).max(0.0))
                .sum();
            gaps / (lines.len() - 1) as f64
        };
        pages.push(PageStats {
            page_number,
            avg_font_size,
            avg_font_weight,
            avg_line_spacing,
            avg_indentation,
        });
    }
    doc.pages = pages;
}

const CSV_COLUMNS: [&str; 13] = [
    "doc_id",
    "page_number",
    "text",
    "font_size",
    "font_weight",
    "font_family",
    "x_left",
    "x_right",
    "y_top",
    "y_bottom",
    "page_width",
    "page_height",
    "label",
];

/// Write the lines of `doc` as a line-record CSV. Floats use the shortest
/// round-tripping decimal form, so save -> load -> save is byte-identical.
pub fn save_line_records(doc: &Document, sink: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_COLUMNS)
        .map_err(|e| Error::Data(format!("csv write: {e}")))?;
    for line in &doc.lines {
        let label = line.label.map(|l| l.to_string()).unwrap_or_default();
        w.write_record([
            doc.doc_id.as_str(),
            &line.page_number.to_string(),
            &line.text,
            &line.font_size.to_string(),
            &line.font_weight.to_string(),
            &line.font_family,
            &line.x_left.to_string(),
            &line.x_right.to_string(),
            &line.y_top.to_string(),
            &line.y_bottom.to_string(),
            &line.page_width.to_string(),
            &line.page_height.to_string(),
            &label,
        ])
        .map_err(|e| Error::Data(format!("csv write: {e}")))?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv flush: {e}")))?;
    Ok(())
}

fn parse_csv_field<T: std::str::FromStr>(field: &str, column: &str, row: usize) -> Result<T> {
    field.parse().map_err(|_| {
        Error::Schema(format!(
            "row {row}: column {column:?} has non-{} value {field:?}",
            std::any::type_name::<T>()
        ))
    })
}

/// Load one document from a line-record CSV. All rows must share a single
/// `doc_id`. Page statistics are recomputed; bookmarks are not stored in the
/// CSV and come back as `None`.
pub fn load_line_records(source: &mut dyn Read) -> Result<Document> {
    let docs = load_line_records_multi(source)?;
    match docs.len() {
        0 => Ok(Document::new("")),
        1 => Ok(docs.into_iter().next().expect("length checked")),
        n => Err(Error::Schema(format!(
            "expected a single doc_id in CSV, found {n}"
        ))),
    }
}

/// Load every document in a (possibly multi-document) line-record CSV,
/// grouped by the `doc_id` column, in first-appearance order.
pub fn load_line_records_multi(source: &mut dyn Read) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(csv_parse_error)?
        .iter()
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let has_label = match headers.len() {
        13 => true,
        12 => false,
        n => {
            return Err(Error::Schema(format!(
                "expected 12 or 13 CSV columns, found {n}"
            )))
        }
    };
    for (i, expected) in CSV_COLUMNS.iter().take(headers.len()).enumerate() {
        if headers[i] != *expected {
            return Err(Error::Schema(format!(
                "CSV column {i} must be {expected:?}, found {:?}",
                headers[i]
            )));
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<LineRecord>> = HashMap::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(csv_parse_error)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let label = if has_label && !field(12).is_empty() {
            Some(parse_csv_field::<u32>(field(12), "label", row)?)
        } else {
            None
        };
        let line = LineRecord {
            text: field(2).to_owned(),
            page_number: parse_csv_field(field(1), "page_number", row)?,
            font_size: parse_csv_field(field(3), "font_size", row)?,
            font_weight: parse_csv_field(field(4), "font_weight", row)?,
            font_family: field(5).to_owned(),
            x_left: parse_csv_field(field(6), "x_left", row)?,
            x_right: parse_csv_field(field(7), "x_right", row)?,
            y_top: parse_csv_field(field(8), "y_top", row)?,
            y_bottom: parse_csv_field(field(9), "y_bottom", row)?,
            page_width: parse_csv_field(field(10), "page_width", row)?,
            page_height: parse_csv_field(field(11), "page_height", row)?,
            label,
        };
        line.validate()?;
        let doc_id = field(0).to_owned();
        if !grouped.contains_key(&doc_id) {
            order.push(doc_id.clone());
        }
        grouped.entry(doc_id).or_default().push(line);
    }

    let mut docs = Vec::with_capacity(order.len());
    for doc_id in order {
        let mut doc = Document::new(doc_id.clone());
        doc.lines = grouped.remove(&doc_id).expect("grouped by construction");
        doc.sort_reading_order();
        compute_page_statistics(&mut doc);
        docs.push(doc);
    }
    Ok(docs)
}

fn csv_parse_error(e: csv::Error) -> Error {
    let (line, offset) = match e.position() {
        Some(p) => (p.line() as usize, p.byte() as usize),
        None => (0, 0),
    };
    Error::Parse {
        line,
        offset,
        message: format!("malformed CSV: {e}"),
    }
}

/// Write a document back out as TETML-subset XML. Each line becomes one
/// word per whitespace token, with uniform glyph boxes spanning the line
/// box, so parsing the output reconstructs the same lines and attributes.
pub fn save_tetml(doc: &Document, sink: &mut dyn Write) -> Result<()> {
    let mut pages: Vec<u32> = doc.lines.iter().map(|l| l.page_number).collect();
    pages.sort_unstable();
    pages.dedup();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<TET>\n <Document>\n  <Pages>\n");
    for page in pages {
        let lines: Vec<&LineRecord> = doc
            .lines
            .iter()
            .filter(|l| l.page_number == page)
            .collect();
        let (w, h) = (lines[0].page_width, lines[0].page_height);
        out.push_str(&format!(
            "   <Page number=\"{page}\" width=\"{w}\" height=\"{h}\">\n    <Content>\n     <Para>\n"
        ));
        for line in lines {
            let chars_total: usize = line.text.chars().count().max(1);
            let char_w = (line.x_right - line.x_left) / chars_total as f64;
            let glyph_h = line.y_bottom - line.y_top;
            let pdf_y = line.page_height - line.y_bottom;
            let weight = if line.font_weight >= 600.0 { "bold" } else { "normal" };
            let mut cursor = line.x_left;
            for word in line.text.split_whitespace() {
                out.push_str("      <Word>\n       <Text>");
                out.push_str(&xml_escape(word));
                out.push_str("</Text>\n");
                for ch in word.chars() {
                    out.push_str(&format!(
                        "       <Glyph font=\"{}\" weight=\"{weight}\" size=\"{}\" x=\"{cursor}\" y=\"{pdf_y}\" width=\"{char_w}\" height=\"{glyph_h}\">{}</Glyph>\n",
                        xml_escape(&line.font_family),
                        line.font_size,
                        xml_escape(&ch.to_string()),
                    ));
                    cursor += char_w;
                }
                cursor += char_w; // inter-word space
                out.push_str("      </Word>\n");
            }
        }
        out.push_str("     </Para>\n    </Content>\n   </Page>\n");
    }
    out.push_str("  </Pages>\n </Document>\n</TET>\n");
    sink.write_all(out.as_bytes())
        .map_err(|e| Error::Data(format!("tetml write: {e}")))
}

fn xml_escape(raw: &str) -> String {
    raw.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn save_line_records_to_path(doc: &Document, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    save_line_records(doc, &mut file)
}

pub fn load_line_records_from_path(path: &Path) -> Result<Document> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_line_records(&mut file)
}

pub fn load_corpus_csv_path(path: &Path) -> Result<Vec<Document>> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_line_records_multi(&mut file)
}

mod tetml {
    //! Parser for the TETML subset: `Page`, optional `Fonts`/`Font`
    //! declarations, `Word` elements with per-character `Glyph` boxes.
    //! Everything else is skipped. Glyph coordinates are PDF-style
    //! (origin bottom-left, y up) and are flipped to top-down while
    //! assembling lines.

    use super::*;
    use quick_xml::events::{BytesStart, Event};
    use quick_xml::Reader;

    #[derive(Debug, Clone)]
    struct Glyph {
        family: String,
        weight: f64,
        size: f64,
        x: f64,
        y: f64,
        width: f64,
        height: f64,
        ch: String,
    }

    #[derive(Debug)]
    struct Word {
        text: String,
        glyphs: Vec<Glyph>,
    }

    impl Word {
        fn x_left(&self) -> f64 {
            self.glyphs.iter().map(|g| g.x).fold(f64::INFINITY, f64::min)
        }
        fn x_right(&self) -> f64 {
            self.glyphs
                .iter()
                .map(|g| g.x + g.width)
                .fold(f64::NEG_INFINITY, f64::max)
        }
        /// Top-down box given the page height.
        fn top_down_box(&self, page_height: f64) -> (f64, f64) {
            let pdf_top = self
                .glyphs
                .iter()
                .map(|g| g.y + g.height)
                .fold(f64::NEG_INFINITY, f64::max);
            let pdf_bottom = self.glyphs.iter().map(|g| g.y).fold(f64::INFINITY, f64::min);
            (page_height - pdf_top, page_height - pdf_bottom)
        }
    }

    #[derive(Debug, Clone)]
    struct FontDecl {
        family: String,
        weight: f64,
    }

    struct PageCtx {
        number: u32,
        width: f64,
        height: f64,
        words: Vec<Word>,
    }

    pub fn parse(input: &mut dyn Read, doc_id: &str) -> Result<Document> {
        let mut raw = Vec::new();
        input
            .read_to_end(&mut raw)
            .map_err(|e| Error::io("<tetml input>", e))?;
        let text = String::from_utf8(raw)
            .map_err(|e| Error::Schema(format!("TETML is not valid UTF-8: {e}")))?;

        let mut reader = Reader::from_str(&text);
        reader.config_mut().trim_text(true);

        let mut fonts: HashMap<String, FontDecl> = HashMap::new();
        let mut doc = Document::new(doc_id);
        let mut page: Option<PageCtx> = None;
        let mut word: Option<Word> = None;
        let mut pending_glyph: Option<Glyph> = None;
        let mut in_text_elem = false;

        loop {
            let pos = reader.buffer_position() as usize;
            let event = reader
                .read_event()
                .map_err(|e| xml_error(&text, reader.buffer_position() as usize, e))?;
            match event {
                Event::Start(ref e) | Event::Empty(ref e) => {
                    let empty = matches!(event, Event::Empty(_));
                    match local_name(e).as_str() {
                        "page" => {
                            if page.is_some() {
                                return Err(Error::Schema("nested Page elements".into()));
                            }
                            let number = req_attr(e, "number", &text, pos)?.parse().map_err(
                                |_| Error::Schema("Page attribute \"number\" must be an integer".into()),
                            )?;
                            let width = req_f64(e, "width", &text, pos)?;
                            let height = req_f64(e, "height", &text, pos)?;
                            let ctx = PageCtx {
                                number,
                                width,
                                height,
                                words: Vec::new(),
                            };
                            if empty {
                                flush_page(&mut doc, ctx)?;
                            } else {
                                page = Some(ctx);
                            }
                        }
                        "font" => {
                            let id = req_attr(e, "id", &text, pos)?;
                            let name = req_attr(e, "name", &text, pos)?;
                            let weight = match attr(e, "weight")? {
                                Some(w) => parse_weight(&w)?,
                                None => weight_from_name(&name),
                            };
                            fonts.insert(
                                id,
                                FontDecl {
                                    family: name,
                                    weight,
                                },
                            );
                        }
                        "word" => {
                            if page.is_none() {
                                return Err(Error::Schema("Word outside of a Page".into()));
                            }
                            word = Some(Word {
                                text: String::new(),
                                glyphs: Vec::new(),
                            });
                        }
                        "text" => {
                            in_text_elem = word.is_some();
                        }
                        "glyph" => {
                            let w = word.as_mut().ok_or_else(|| {
                                Error::Schema("Glyph outside of a Word".into())
                            })?;
                            let font_ref = req_attr(e, "font", &text, pos)?;
                            let decl = fonts.get(&font_ref).cloned().unwrap_or_else(|| FontDecl {
                                weight: weight_from_name(&font_ref),
                                family: font_ref.clone(),
                            });
                            // An explicit weight on the glyph wins over the
                            // font declaration or name inference.
                            let weight = match attr(e, "weight")? {
                                Some(w) => parse_weight(&w)?,
                                None => decl.weight,
                            };
                            let glyph = Glyph {
                                family: decl.family,
                                weight,
                                size: req_f64(e, "size", &text, pos)?,
                                x: req_f64(e, "x", &text, pos)?,
                                y: req_f64(e, "y", &text, pos)?,
                                width: req_f64(e, "width", &text, pos)?,
                                height: req_f64(e, "height", &text, pos)?,
                                ch: String::new(),
                            };
                            if empty {
                                w.glyphs.push(glyph);
                            } else {
                                pending_glyph = Some(glyph);
                            }
                        }
                        _ => {}
                    }
                }
                Event::Text(t) => {
                    let content = t
                        .xml10_content()
                        .map_err(|e| xml_error(&text, pos, e.into()))?;
                    if let Some(g) = pending_glyph.as_mut() {
                        g.ch.push_str(&content);
                    } else if in_text_elem {
                        if let Some(w) = word.as_mut() {
                            w.text.push_str(&content);
                        }
                    }
                }
                Event::End(ref e) => match local_name_end(e).as_str() {
                    "page" => {
                        let ctx = page.take().ok_or_else(|| {
                            Error::Schema("unmatched closing Page".into())
                        })?;
                        flush_page(&mut doc, ctx)?;
                    }
                    "word" => {
                        let w = word
                            .take()
                            .ok_or_else(|| Error::Schema("unmatched closing Word".into()))?;
                        if w.glyphs.is_empty() {
                            return Err(Error::Schema(format!(
                                "Word {:?} has no Glyph children",
                                w.text
                            )));
                        }
                        if let Some(p) = page.as_mut() {
                            p.words.push(w);
                        }
                    }
                    "text" => in_text_elem = false,
                    "glyph" => {
                        if let (Some(w), Some(g)) = (word.as_mut(), pending_glyph.take()) {
                            w.glyphs.push(g);
                        }
                    }
                    _ => {}
                },
                Event::Eof => break,
                _ => {}
            }
        }
        if page.is_some() {
            return Err(Error::Schema("unterminated Page element".into()));
        }
        doc.sort_reading_order();
        for line in &doc.lines {
            line.validate()?;
        }
        Ok(doc)
    }

    /// Assemble the page's words into lines and append them to the document.
    ///
    /// Two words share a line iff the vertical overlap of their boxes is at
    /// least half the smaller box height. Words are swept in top-down order,
    /// comparing each against the open line's box, which is robust to
    /// superscripts and sub-point jitter.
    fn flush_page(doc: &mut Document, ctx: PageCtx) -> Result<()> {
        let PageCtx {
            number,
            width,
            height,
            mut words,
        } = ctx;
        words.sort_by(|a, b| {
            let (a_top, _) = a.top_down_box(height);
            let (b_top, _) = b.top_down_box(height);
            a_top.total_cmp(&b_top).then(a.x_left().total_cmp(&b.x_left()))
        });

        let mut groups: Vec<(f64, f64, Vec<Word>)> = Vec::new();
        for w in words {
            let (top, bottom) = w.top_down_box(height);
            match groups.last_mut() {
                Some((g_top, g_bottom, members)) if overlaps(*g_top, *g_bottom, top, bottom) => {
                    *g_top = g_top.min(top);
                    *g_bottom = g_bottom.max(bottom);
                    members.push(w);
                }
                _ => groups.push((top, bottom, vec![w])),
            }
        }

        for (y_top, y_bottom, mut members) in groups {
            members.sort_by(|a, b| a.x_left().total_cmp(&b.x_left()));
            let glyphs: Vec<&Glyph> = members.iter().flat_map(|w| w.glyphs.iter()).collect();
            let texts: Vec<&str> = members
                .iter()
                .map(|w| w.text.as_str())
                .filter(|t| !t.is_empty())
                .collect();
            let text = if texts.is_empty() {
                // No Text elements: fall back to glyph characters.
                members
                    .iter()
                    .map(|w| w.glyphs.iter().map(|g| g.ch.as_str()).collect::<String>())
                    .collect::<Vec<_>>()
                    .join(" ")
            } else {
                texts.join(" ")
            };
            let x_left = members.iter().map(|w| w.x_left()).fold(f64::INFINITY, f64::min);
            let x_right = members
                .iter()
                .map(|w| w.x_right())
                .fold(f64::NEG_INFINITY, f64::max);
            doc.lines.push(LineRecord {
                text,
                page_number: number,
                font_size: mode_f64(glyphs.iter().map(|g| g.size)),
                font_weight: mode_f64(glyphs.iter().map(|g| g.weight)),
                font_family: mode_str(glyphs.iter().map(|g| g.family.as_str())),
                x_left,
                x_right,
                y_top,
                y_bottom,
                page_width: width,
                page_height: height,
                label: None,
            });
        }
        Ok(())
    }

    fn overlaps(a_top: f64, a_bottom: f64, b_top: f64, b_bottom: f64) -> bool {
        let overlap = a_bottom.min(b_bottom) - a_top.max(b_top);
        let smaller = (a_bottom - a_top).min(b_bottom - b_top);
        if smaller <= 0.0 {
            // Degenerate (zero-height) boxes share a line when they touch.
            return overlap >= 0.0;
        }
        overlap >= 0.5 * smaller
    }

    /// Most frequent value; ties broken by earliest occurrence, i.e. the
    /// value carried by the line's first character among the tied ones.
    fn mode_f64(values: impl Iterator<Item = f64>) -> f64 {
        let values: Vec<f64> = values.collect();
        let mut counts: Vec<(u64, usize, usize)> = Vec::new(); // (bits, count, first_idx)
        for (i, v) in values.iter().enumerate() {
            let bits = v.to_bits();
            match counts.iter_mut().find(|(b, _, _)| *b == bits) {
                Some((_, c, _)) => *c += 1,
                None => counts.push((bits, 1, i)),
            }
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
            .map(|(bits, _, _)| f64::from_bits(bits))
            .unwrap_or(0.0)
    }

    fn mode_str<'a>(values: impl Iterator<Item = &'a str>) -> String {
        let values: Vec<&str> = values.collect();
        let mut counts: Vec<(&str, usize, usize)> = Vec::new();
        for (i, v) in values.iter().enumerate() {
            match counts.iter_mut().find(|(s, _, _)| s == v) {
                Some((_, c, _)) => *c += 1,
                None => counts.push((v, 1, i)),
            }
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
            .map(|(s, _, _)| s.to_owned())
            .unwrap_or_default()
    }

    fn local_name(e: &BytesStart) -> String {
        String::from_utf8_lossy(e.local_name().as_ref()).to_lowercase()
    }

    fn local_name_end(e: &quick_xml::events::BytesEnd) -> String {
        String::from_utf8_lossy(e.local_name().as_ref()).to_lowercase()
    }

    fn attr(e: &BytesStart, name: &str) -> Result<Option<String>> {
        for a in e.attributes() {
            let a = a.map_err(|err| Error::Schema(format!("bad attribute: {err}")))?;
            if String::from_utf8_lossy(a.key.local_name().as_ref()).eq_ignore_ascii_case(name) {
                let v = a
                    .normalized_value(quick_xml::XmlVersion::Explicit1_0)
                    .map_err(|err| Error::Schema(format!("bad attribute value: {err}")))?;
                return Ok(Some(v.into_owned()));
            }
        }
        Ok(None)
    }

    fn req_attr(e: &BytesStart, name: &str, text: &str, pos: usize) -> Result<String> {
        attr(e, name)?.ok_or_else(|| {
            let elem = String::from_utf8_lossy(e.name().as_ref()).into_owned();
            let (line, _) = line_of(text, pos);
            Error::Schema(format!(
                "element {elem:?} at line {line} is missing required attribute {name:?}"
            ))
        })
    }

    fn req_f64(e: &BytesStart, name: &str, text: &str, pos: usize) -> Result<f64> {
        let raw = req_attr(e, name, text, pos)?;
        raw.parse().map_err(|_| {
            Error::Schema(format!(
                "attribute {name:?} must be numeric, got {raw:?}"
            ))
        })
    }

    fn parse_weight(raw: &str) -> Result<f64> {
        match raw.to_ascii_lowercase().as_str() {
            "normal" | "regular" => Ok(400.0),
            "bold" => Ok(700.0),
            other => other.parse().map_err(|_| {
                Error::Schema(format!(
                    "font weight must be normal, bold, or numeric; got {raw:?}"
                ))
            }),
        }
    }

    fn weight_from_name(name: &str) -> f64 {
        if name.to_ascii_lowercase().contains("bold") {
            700.0
        } else {
            400.0
        }
    }

    fn line_of(text: &str, byte_pos: usize) -> (usize, usize) {
        let prefix = &text.as_bytes()[..byte_pos.min(text.len())];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
        let col = prefix.len() - prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        (line, col)
    }

    fn xml_error(text: &str, pos: usize, e: quick_xml::Error) -> Error {
        let (line, _) = line_of(text, pos);
        Error::Parse {
            line,
            offset: pos,
            message: format!("malformed XML: {e}"),
        }
    }
}
