//! Shared domain types: label schemas, per-model annotations, scored items,
//! and evaluation curves. All types are immutable after construction and
//! safe to share between workers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Logprob substituted for label tokens missing from an API's top-k list.
/// Finite so the top-two gap stays well-defined; substitutions are recorded
/// in [`TokenLogProbs::floor_applied`].
pub const DEFAULT_FLOOR_LOGPROB: f64 = -100.0;

/// One class of a labeling task: a human-readable name plus the single
/// canonical token the model must emit for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub name: String,
    pub answer_token: String,
}

/// The constrained label set for one task: an ordered list of classes.
/// Class order is the tie-break order everywhere ties can occur.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub task_id: String,
    pub classes: Vec<ClassLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaError {
    TooFewClasses { found: usize },
    DuplicateClass { name: String },
    DuplicateToken { token: String },
    BadToken { token: String },
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaError::TooFewClasses { found } => {
                write!(f, "schema needs at least 2 classes, found {found}")
            }
            SchemaError::DuplicateClass { name } => write!(f, "duplicate class name {name:?}"),
            SchemaError::DuplicateToken { token } => {
                write!(f, "duplicate answer token {token:?}")
            }
            SchemaError::BadToken { token } => {
                write!(f, "answer token {token:?} is empty or has surrounding whitespace")
            }
        }
    }
}

impl LabelSchema {
    pub fn new(task_id: impl Into<String>, classes: Vec<ClassLabel>) -> Result<Self, SchemaError> {
        let schema = LabelSchema { task_id: task_id.into(), classes };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.classes.len() < 2 {
            return Err(SchemaError::TooFewClasses { found: self.classes.len() });
        }
        let mut names = BTreeSet::new();
        let mut tokens = BTreeSet::new();
        for class in &self.classes {
            let token = class.answer_token.as_str();
            if token.is_empty() || token != token.trim() {
                return Err(SchemaError::BadToken { token: token.to_string() });
            }
            if !names.insert(class.name.as_str()) {
                return Err(SchemaError::DuplicateClass { name: class.name.clone() });
            }
            if !tokens.insert(token) {
                return Err(SchemaError::DuplicateToken { token: token.to_string() });
            }
        }
        Ok(())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(|c| c.answer_token.as_str())
    }

    pub fn class_for_token(&self, token: &str) -> Option<&ClassLabel> {
        self.classes.iter().find(|c| c.answer_token == token)
    }

    pub fn class_by_name(&self, name: &str) -> Option<&ClassLabel> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Position of a class name in schema order, used for tie-breaking.
    pub fn class_rank(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }
}

/// One unit of text to label, optionally with a human gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub item_id: String,
    pub text: String,
    pub gold_label: Option<String>,
}

/// Log-probabilities over the schema's answer tokens, with a record of
/// which entries were filled in by the floor rule rather than returned
/// by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogProbs {
    pub entries: BTreeMap<String, f64>,
    #[serde(default)]
    pub floor_applied: BTreeSet<String>,
}

impl TokenLogProbs {
    pub fn new(entries: BTreeMap<String, f64>) -> Self {
        TokenLogProbs { entries, floor_applied: BTreeSet::new() }
    }

    /// Fills in every schema token missing from `entries` at `floor`,
    /// recording each substitution. Idempotent.
    pub fn floor_complete(&mut self, schema: &LabelSchema, floor: f64) {
        for token in schema.tokens() {
            if !self.entries.contains_key(token) {
                self.entries.insert(token.to_string(), floor);
                self.floor_applied.insert(token.to_string());
            }
        }
    }

    /// The schema token with the highest logprob, ties broken by schema
    /// class order. `None` when no schema token has an entry.
    pub fn argmax<'a>(&self, schema: &'a LabelSchema) -> Option<&'a str> {
        let mut best: Option<(&str, f64)> = None;
        for class in &schema.classes {
            if let Some(&lp) = self.entries.get(&class.answer_token) {
                match best {
                    Some((_, b)) if lp <= b => {}
                    _ => best = Some((class.answer_token.as_str(), lp)),
                }
            }
        }
        best.map(|(t, _)| t)
    }
}

/// The five qualitative self-report levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfQual {
    No,
    Low,
    Medium,
    High,
    Absolute,
}

impl SelfQual {
    pub const ALL: [SelfQual; 5] =
        [SelfQual::No, SelfQual::Low, SelfQual::Medium, SelfQual::High, SelfQual::Absolute];

    pub fn as_str(&self) -> &'static str {
        match self {
            SelfQual::No => "no",
            SelfQual::Low => "low",
            SelfQual::Medium => "medium",
            SelfQual::High => "high",
            SelfQual::Absolute => "absolute",
        }
    }
}

impl fmt::Display for SelfQual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelfQual {
    type Err = ();

    /// Case-insensitive parse of one of the five level words.
    fn from_str(s: &str) -> Result<Self, ()> {
        let s = s.trim();
        SelfQual::ALL
            .into_iter()
            .find(|level| level.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

/// One LLM's output for one item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAnnotation {
    pub model_id: String,
    pub item_id: String,
    pub chosen_token: String,
    pub label_logprobs: TokenLogProbs,
    #[serde(default)]
    pub self_quant: Option<u32>,
    #[serde(default)]
    pub self_qual: Option<SelfQual>,
    /// Opaque model output kept for audit; never interpreted.
    #[serde(default)]
    pub raw_response: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnnotationError {
    /// `chosen_token` or a logprob key is not an answer token of the schema.
    UnknownToken { token: String },
    /// `chosen_token` is not the max-logprob token (ties by schema order).
    InconsistentArgmax { chosen: String, expected: String },
    /// `self_quant` outside [0, 100].
    RangeError { value: u32 },
    /// A logprob above zero cannot be the log of a probability.
    PositiveLogProb { token: String, value: f64 },
}

impl fmt::Display for AnnotationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotationError::UnknownToken { token } => {
                write!(f, "token {token:?} is not in the label schema")
            }
            AnnotationError::InconsistentArgmax { chosen, expected } => write!(
                f,
                "chosen token {chosen:?} is not the max-logprob token (expected {expected:?})"
            ),
            AnnotationError::RangeError { value } => {
                write!(f, "self_quant {value} outside [0, 100]")
            }
            AnnotationError::PositiveLogProb { token, value } => {
                write!(f, "logprob {value} for token {token:?} is above zero")
            }
        }
    }
}

/// Validates an annotation against a schema and floor-completes its
/// logprobs. Idempotent: validating the output again is a no-op.
pub fn validate_annotation(
    mut annotation: ModelAnnotation,
    schema: &LabelSchema,
    floor: f64,
) -> Result<ModelAnnotation, AnnotationError> {
    if schema.class_for_token(&annotation.chosen_token).is_none() {
        return Err(AnnotationError::UnknownToken { token: annotation.chosen_token });
    }
    for (token, &lp) in &annotation.label_logprobs.entries {
        if schema.class_for_token(token).is_none() {
            return Err(AnnotationError::UnknownToken { token: token.clone() });
        }
        if lp > 0.0 {
            return Err(AnnotationError::PositiveLogProb { token: token.clone(), value: lp });
        }
    }
    if let Some(v) = annotation.self_quant {
        if v > 100 {
            return Err(AnnotationError::RangeError { value: v });
        }
    }
    annotation.label_logprobs.floor_complete(schema, floor);
    let expected = annotation
        .label_logprobs
        .argmax(schema)
        .expect("schema has classes after floor completion");
    if expected != annotation.chosen_token {
        return Err(AnnotationError::InconsistentArgmax {
            chosen: annotation.chosen_token,
            expected: expected.to_string(),
        });
    }
    Ok(annotation)
}

/// The five confidence-scoring strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Qualitative,
    Quantitative,
    LogInverse,
    CScore,
    CEnsemble,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Qualitative,
        Strategy::Quantitative,
        Strategy::LogInverse,
        Strategy::CScore,
        Strategy::CEnsemble,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Qualitative => "qualitative",
            Strategy::Quantitative => "quantitative",
            Strategy::LogInverse => "log_inverse",
            Strategy::CScore => "c_score",
            Strategy::CEnsemble => "c_ensemble",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or(())
    }
}

/// An item with its confidence score under one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub item_id: String,
    pub strategy: Strategy,
    pub score: f64,
    pub predicted_label: String,
    /// Present iff the item carried a gold label.
    pub correct: Option<bool>,
}

/// Recall-of-misclassified curve: fraction of all wrong labels found within
/// the bottom-x fraction of items ranked by confidence, plus its AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCurve {
    /// `n_items + 1` points from (0, 0) to (1, 1), x strictly increasing,
    /// y non-decreasing.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub n_items: usize,
    pub n_wrong: usize,
}
