//! On-disk record shapes. Annotations, scored items, and triage lists are
//! line-delimited JSON (one object per line); schemas are a single JSON
//! document; curves and summaries are comma-separated text.
//!
//! Field names here are the interchange contract; renaming one is a
//! breaking format change.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use uq_core::model::{ModelAnnotation, SelfQual, Strategy, TokenLogProbs};
use uq_core::{ClassLabel, LabelSchema};

/// Schema file: task id plus the ordered class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub task_id: String,
    pub classes: Vec<ClassEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub name: String,
    pub answer_token: String,
}

impl SchemaFile {
    pub fn into_schema(self) -> Result<LabelSchema, uq_core::model::SchemaError> {
        LabelSchema::new(
            self.task_id,
            self.classes
                .into_iter()
                .map(|c| ClassLabel { name: c.name, answer_token: c.answer_token })
                .collect(),
        )
    }

    pub fn from_schema(schema: &LabelSchema) -> Self {
        SchemaFile {
            task_id: schema.task_id.clone(),
            classes: schema
                .classes
                .iter()
                .map(|c| ClassEntry { name: c.name.clone(), answer_token: c.answer_token.clone() })
                .collect(),
        }
    }
}

/// One annotation line: one model's output for one item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub model_id: String,
    pub item_id: String,
    pub chosen_token: String,
    pub logprobs: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub floor_applied: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_quant: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_qual: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub raw_response: String,
}

impl AnnotationRecord {
    pub fn from_annotation(ann: &ModelAnnotation) -> Self {
        AnnotationRecord {
            model_id: ann.model_id.clone(),
            item_id: ann.item_id.clone(),
            chosen_token: ann.chosen_token.clone(),
            logprobs: ann.label_logprobs.entries.clone(),
            floor_applied: ann.label_logprobs.floor_applied.iter().cloned().collect(),
            self_quant: ann.self_quant,
            self_qual: ann.self_qual.map(|q| q.as_str().to_string()),
            raw_response: ann.raw_response.clone(),
        }
    }

    /// Converts to the in-memory type. `self_qual` is matched
    /// case-insensitively; an unrecognized word comes back in `Err`.
    pub fn into_annotation(self) -> Result<ModelAnnotation, String> {
        let self_qual = match &self.self_qual {
            None => None,
            Some(word) => Some(word.parse::<SelfQual>().map_err(|_| word.clone())?),
        };
        let mut logprobs = TokenLogProbs::new(self.logprobs);
        logprobs.floor_applied = self.floor_applied.into_iter().collect();
        Ok(ModelAnnotation {
            model_id: self.model_id,
            item_id: self.item_id,
            chosen_token: self.chosen_token,
            label_logprobs: logprobs,
            self_quant: self.self_quant,
            self_qual,
            raw_response: self.raw_response,
        })
    }
}

/// One scored line: an item's confidence under one strategy. `model_id`
/// is `"ensemble"` for the cross-model strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub model_id: String,
    pub item_id: String,
    pub strategy: Strategy,
    pub score: f64,
    pub predicted_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
}

/// One triage line handed to human annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageRecord {
    pub rank: usize,
    pub item_id: String,
    pub score: f64,
    pub predicted_label: String,
    pub strategy: Strategy,
    pub model_id: String,
    #[serde(default)]
    pub text: String,
}
