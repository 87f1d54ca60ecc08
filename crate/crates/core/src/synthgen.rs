//! Synthetic labeled corpora with planted structure: numbered bold headers
//! over class-distinctive body text, with configurable layout noise. Ground
//! truth (per-line labels and the bookmark TOC) is recorded exactly.

use crate::error::{Error, Result};
use crate::ingest::{compute_page_statistics, BookmarkEntry, Document, LineRecord};
use crate::semantics::ARXIV_CLASSES;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Generator parameters. All noise rates are probabilities in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_docs: usize,
    /// Inclusive range of sections per document.
    pub sections_per_doc: (usize, usize),
    /// Probability of a section opening at depth 1 / 2 / 3.
    pub depth_distribution: [f64; 3],
    /// Inclusive range of body lines per section.
    pub lines_per_section: (usize, usize),
    /// Class name -> distinctive vocabulary for section bodies.
    pub class_vocab: BTreeMap<String, Vec<String>>,
    /// Probability that a header is rendered in plain body font.
    pub header_font_noise: f64,
    /// Probability that a header loses its numbering prefix.
    pub numbering_noise: f64,
    /// Uniform relative jitter applied to line gaps (0.1 = +/-10%).
    pub spacing_jitter: f64,
    /// Probability that a header's text is corrupted relative to its
    /// bookmark title (breaks exact string similarity).
    pub header_text_corruption: f64,
    /// Probability of a caption-style decoy line after a section's body.
    pub caption_rate: f64,
    /// Probability of a numbered list-item decoy line inside a body.
    pub list_item_rate: f64,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let ranges_ok = self.sections_per_doc.0 >= 1
            && self.sections_per_doc.0 <= self.sections_per_doc.1
            && self.lines_per_section.0 >= 1
            && self.lines_per_section.0 <= self.lines_per_section.1;
        if !ranges_ok {
            return Err(Error::Contract("corpus spec ranges are empty".into()));
        }
        let rates = [
            self.header_font_noise,
            self.numbering_noise,
            self.spacing_jitter,
            self.header_text_corruption,
            self.caption_rate,
            self.list_item_rate,
        ];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Contract("noise rates must lie in [0, 1]".into()));
        }
        let dsum: f64 = self.depth_distribution.iter().sum();
        if self.depth_distribution.iter().any(|p| *p < 0.0) || dsum <= 0.0 {
            return Err(Error::Contract("depth distribution must be non-negative and nonzero".into()));
        }
        if self.class_vocab.is_empty() {
            return Err(Error::Contract("class vocabulary tables are empty".into()));
        }
        Ok(())
    }

    /// Zero-noise variant of this spec.
    pub fn without_noise(mut self) -> Self {
        self.header_font_noise = 0.0;
        self.numbering_noise = 0.0;
        self.spacing_jitter = 0.0;
        self.header_text_corruption = 0.0;
        self
    }
}

fn default_class_vocab() -> BTreeMap<String, Vec<String>> {
    let table: [(&str, &[&str]); 20] = [
        ("Introduction", &["problem", "goal", "motivation", "challenge", "aim", "scope", "setting", "question"]),
        ("Conclusion", &["conclude", "takeaway", "closing", "lesson", "recap", "wrapup", "verdict", "parting"]),
        ("Discussion", &["interpretation", "implication", "insight", "caveat", "remark", "tradeoff", "nuance", "angle"]),
        ("References", &["journal", "volume", "pages", "press", "proceedings", "editor", "publisher", "doi"]),
        ("Acknowledgments", &["thank", "grant", "funding", "support", "foundation", "award", "gift", "colleagues"]),
        ("Results", &["gain", "outcome", "improvement", "measurement", "observed", "curve", "trend", "margin"]),
        ("Abstract", &["briefly", "synopsis", "digest", "capsule", "gist", "essence", "nutshell", "precis"]),
        ("Appendix", &["supplementary", "extended", "derivation", "listing", "tabulated", "auxiliary", "omitted", "full"]),
        ("RelatedWork", &["prior", "previous", "survey", "literature", "compared", "earlier", "cited", "classical"]),
        ("Experiments", &["trial", "setup", "configuration", "protocol", "benchmark", "sweep", "ablation", "replicate"]),
        ("Methodology", &["procedure", "workflow", "stage", "recipe", "treatment", "sampling", "criterion", "instrument"]),
        ("Preliminary", &["notation", "definition", "symbol", "denote", "formal", "axiom", "convention", "operator"]),
        ("ProofOfTheorem", &["theorem", "lemma", "induction", "contradiction", "holds", "bound", "inequality", "claim"]),
        ("Evaluation", &["metric", "precision", "recall", "baseline", "comparison", "scoring", "judge", "criteria"]),
        ("FutureWork", &["future", "extend", "direction", "explore", "roadmap", "next", "open", "horizon"]),
        ("Datasets", &["corpus", "samples", "records", "instances", "collection", "annotated", "split", "held"]),
        ("Contribution", &["contribution", "novel", "key", "main", "highlight", "advance", "delta", "firsts"]),
        ("Background", &["background", "history", "context", "review", "concept", "foundation", "primer", "origin"]),
        ("Implementation", &["code", "library", "module", "runtime", "software", "memory", "thread", "release"]),
        ("Approach", &["model", "architecture", "framework", "algorithm", "design", "layer", "component", "pipeline"]),
    ];
    table
        .iter()
        .map(|(c, words)| (c.to_string(), words.iter().map(|w| w.to_string()).collect()))
        .collect()
}

impl Default for CorpusSpec {
    /// The standard seeded corpus used by the desk-scale experiments.
    fn default() -> Self {
        CorpusSpec {
            n_docs: 40,
            sections_per_doc: (6, 10),
            depth_distribution: [0.45, 0.35, 0.20],
            lines_per_section: (3, 7),
            class_vocab: default_class_vocab(),
            header_font_noise: 0.20,
            numbering_noise: 0.15,
            spacing_jitter: 0.10,
            header_text_corruption: 0.0,
            caption_rate: 0.25,
            list_item_rate: 0.25,
            seed: 2024,
        }
    }
}

const FILLER: [&str; 28] = [
    "the", "a", "of", "and", "to", "in", "we", "is", "are", "with", "for", "on", "this", "that",
    "it", "as", "by", "an", "be", "from", "which", "was", "show", "present", "using", "given",
    "describe", "consider",
];

const PAGE_WIDTH: f64 = 612.0;
const PAGE_HEIGHT: f64 = 792.0;
const MARGIN: f64 = 72.0;
const BODY_SIZE: f64 = 10.0;
const BODY_GAP: f64 = 12.0;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

struct Layout {
    page: u32,
    baseline: f64,
}

impl Layout {
    fn advance(&mut self, gap: f64) {
        self.baseline += gap;
        if self.baseline > PAGE_HEIGHT - MARGIN {
            self.page += 1;
            self.baseline = MARGIN;
        }
    }
}

fn push_line(
    doc: &mut Document,
    layout: &mut Layout,
    text: String,
    size: f64,
    weight: f64,
    label: u32,
) {
    let family = if weight >= 600.0 { "Nimbus-Bold" } else { "Nimbus-Roman" };
    let width = (text.chars().count() as f64 * size * 0.5).min(PAGE_WIDTH - 2.0 * MARGIN);
    doc.lines.push(LineRecord {
        text,
        page_number: layout.page,
        font_size: size,
        font_weight: weight,
        font_family: family.into(),
        x_left: MARGIN,
        x_right: MARGIN + width.max(1.0),
        y_top: layout.baseline - size,
        y_bottom: layout.baseline,
        page_width: PAGE_WIDTH,
        page_height: PAGE_HEIGHT,
        label: Some(label),
    });
}

fn title_case(words: &[&str]) -> String {
    words
        .iter()
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn body_sentence(rng: &mut ChaCha8Rng, vocab: &[String]) -> String {
    let n_words = rng.random_range(6..=12);
    let mut words = Vec::with_capacity(n_words);
    for _ in 0..n_words {
        if rng.random_bool(0.55) && !vocab.is_empty() {
            words.push(vocab[rng.random_range(0..vocab.len())].clone());
        } else {
            words.push(FILLER[rng.random_range(0..FILLER.len())].to_string());
        }
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

fn corrupt(text: &str, rng: &mut ChaCha8Rng) -> String {
    let alpha: Vec<usize> = text
        .char_indices()
        .filter(|(_, c)| c.is_alphabetic())
        .map(|(i, _)| i)
        .collect();
    if alpha.is_empty() {
        return text.to_string();
    }
    let at = alpha[rng.random_range(0..alpha.len())];
    let mut out = String::with_capacity(text.len());
    for (i, c) in text.char_indices() {
        out.push(if i == at { 'x' } else { c });
    }
    out
}

/// Generate a corpus: every document carries exact per-line labels
/// (0 regular, k = header depth) and its bookmark TOC. Deterministic for a
/// fixed spec; documents use independently derived seeds.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<Document>> {
    spec.validate()?;
    let classes: Vec<&String> = spec.class_vocab.keys().collect();
    let mut docs = Vec::with_capacity(spec.n_docs);
    for d in 0..spec.n_docs {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(spec.seed ^ (d as u64)));
        let mut doc = Document::new(format!("doc-{d:04}"));
        let mut layout = Layout {
            page: 1,
            baseline: MARGIN,
        };
        let mut toc: Vec<BookmarkEntry> = Vec::new();

        // Preamble: a title-ish line plus a couple of plain lines.
        push_line(&mut doc, &mut layout, title_case(&["synthetic", "document", "study"]), 18.0, 700.0, 0);
        layout.advance(BODY_GAP * 1.6);
        for _ in 0..2 {
            let s = body_sentence(&mut rng, &[]);
            push_line(&mut doc, &mut layout, s, BODY_SIZE, 400.0, 0);
            layout.advance(BODY_GAP);
        }

        let n_sections = rng.random_range(spec.sections_per_doc.0..=spec.sections_per_doc.1);
        let mut counters = [0usize; 3];
        for s in 0..n_sections {
            // Sample a depth consistent with open numbering counters.
            let mut depth = sample_depth(&mut rng, &spec.depth_distribution);
            if depth >= 2 && counters[0] == 0 {
                depth = 1;
            }
            if depth == 3 && counters[1] == 0 {
                depth = 2;
            }
            match depth {
                1 => {
                    counters[0] += 1;
                    counters[1] = 0;
                    counters[2] = 0;
                }
                2 => {
                    counters[1] += 1;
                    counters[2] = 0;
                }
                _ => counters[2] += 1,
            }
            let numbering = match depth {
                1 => format!("{}", counters[0]),
                2 => format!("{}.{}", counters[0], counters[1]),
                _ => format!("{}.{}.{}", counters[0], counters[1], counters[2]),
            };

            let class = classes[(d + s * 7) % classes.len()].clone();
            let vocab = &spec.class_vocab[&class];
            let phrase = crate::text::normalize_header(&class_phrase(&class));
            // Deeper sections get longer, more specific titles.
            let extra_a = vocab[rng.random_range(0..vocab.len())].clone();
            let extra_b = vocab[rng.random_range(0..vocab.len())].clone();
            let mut title_words: Vec<&str> = phrase.split(' ').collect();
            if depth >= 2 {
                title_words.push(extra_a.as_str());
            }
            if depth >= 3 {
                title_words.push(extra_b.as_str());
            }
            let title = title_case(&title_words);
            toc.push(BookmarkEntry {
                title: title.clone(),
                depth: depth as u32,
                order: s as u32,
            });

            let numbered = !rng.random_bool(spec.numbering_noise);
            let mut header_text = if numbered {
                format!("{numbering} {title}")
            } else {
                title.clone()
            };
            if rng.random_bool(spec.header_text_corruption) {
                header_text = corrupt(&header_text, &mut rng);
            }
            let plain = rng.random_bool(spec.header_font_noise);
            let (size, weight) = if plain {
                (BODY_SIZE, 400.0)
            } else {
                match depth {
                    1 => (16.0, 700.0),
                    2 => (13.0, 700.0),
                    _ => (11.5, 700.0),
                }
            };
            let jitter = 1.0 + rng.random_range(-spec.spacing_jitter..=spec.spacing_jitter);
            layout.advance(BODY_GAP * 0.8 * jitter); // extra space above headers
            push_line(&mut doc, &mut layout, header_text, size, weight, depth as u32);
            let jitter = 1.0 + rng.random_range(-spec.spacing_jitter..=spec.spacing_jitter);
            layout.advance(BODY_GAP * 1.5 * jitter);

            let n_lines = rng.random_range(spec.lines_per_section.0..=spec.lines_per_section.1);
            for _ in 0..n_lines {
                let text = if rng.random_bool(spec.list_item_rate) {
                    format!("{}. {}", rng.random_range(1..9), body_sentence(&mut rng, vocab))
                } else {
                    body_sentence(&mut rng, vocab)
                };
                push_line(&mut doc, &mut layout, text, BODY_SIZE, 400.0, 0);
                let jitter = 1.0 + rng.random_range(-spec.spacing_jitter..=spec.spacing_jitter);
                layout.advance(BODY_GAP * jitter);
            }
            if rng.random_bool(spec.caption_rate) {
                let caption = format!(
                    "Figure {}: {}",
                    rng.random_range(1..9),
                    title_case(&[
                        vocab[rng.random_range(0..vocab.len())].as_str(),
                        FILLER[rng.random_range(0..FILLER.len())],
                    ])
                );
                push_line(&mut doc, &mut layout, caption, BODY_SIZE, 700.0, 0);
                let jitter = 1.0 + rng.random_range(-spec.spacing_jitter..=spec.spacing_jitter);
                layout.advance(BODY_GAP * jitter);
            }
        }

        doc.toc = Some(toc);
        doc.sort_reading_order();
        compute_page_statistics(&mut doc);
        docs.push(doc);
    }
    Ok(docs)
}

fn sample_depth(rng: &mut ChaCha8Rng, dist: &[f64; 3]) -> usize {
    let total: f64 = dist.iter().sum();
    let mut target = rng.random::<f64>() * total;
    for (i, p) in dist.iter().enumerate() {
        target -= p;
        if target <= 0.0 {
            return i + 1;
        }
    }
    3
}

/// Header phrase for a class name: CamelCase split into words.
fn class_phrase(class: &str) -> String {
    let mut out = String::new();
    for (i, c) in class.chars().enumerate() {
        if c.is_uppercase() && i > 0 {
            out.push(' ');
        }
        out.push(c);
    }
    out
}

/// Classes present in the default vocabulary (one table per arXiv class).
pub fn default_classes() -> Vec<String> {
    ARXIV_CLASSES.iter().map(|c| c.to_string()).collect()
}
