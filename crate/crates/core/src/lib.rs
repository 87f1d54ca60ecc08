//! Recovers the logical structure (section headers, header levels, section
//! boundaries, TOC tree) and semantic structure (ontology classes, topic
//! concepts, extractive summaries) of large positional-text documents using
//! classical machine-learning components built from scratch.

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod featurize;
pub mod ingest;
pub mod jsonio;
pub mod learn;
pub mod semantics;
pub mod structure;
pub mod summarize;
pub mod synthgen;
pub mod text;
pub mod topics;

pub use corpus::LabeledDataset;
pub use error::{Error, Result};
pub use featurize::{FeatureVector, HeaderVocabulary, NgramVectorizer, SparseVec};
pub use ingest::{BookmarkEntry, Document, InputFormat, LineRecord, PageStats};
pub use learn::{Classifier, EvalReport, Hyperparams, Model};
pub use semantics::{OntologyClassSet, SequenceModel};
pub use structure::{FeaturePipeline, SectionNode, TocTree, VectorMode};
pub use topics::TopicModel;
