//! Core types and algorithms for scoring the confidence of LLM-generated
//! classification labels and ranking them for human review.
//!
//! The crate is `no_std` (with `alloc`) and performs no I/O. File formats,
//! the HTTP client, and the CLI live in the companion `uq-toolkit` crate.
//!
//! Modules:
//! - [`model`]: label schemas, annotations, scored items, evaluation curves
//! - [`scoring`]: the five confidence strategies (self-reports, log inverse,
//!   top-two logprob gap, cross-model ensemble)
//! - [`evaluation`]: recall-of-misclassified curve, AUC, accuracy
//! - [`triage`]: ranking and bottom-percentile selection
//! - [`report`]: summary-table construction and rendering

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod evaluation;
pub mod model;
pub mod report;
pub mod scoring;
pub mod triage;

pub use model::{
    AnnotationItem, ClassLabel, EvalCurve, LabelSchema, ModelAnnotation, ScoredItem, SelfQual,
    Strategy, TokenLogProbs, DEFAULT_FLOOR_LOGPROB,
};
