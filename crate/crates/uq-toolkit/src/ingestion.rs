//! Loading and validating schemas, annotation batches, and the source
//! datasets the three CSS task adapters consume.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;
use uq_core::model::{
    validate_annotation, AnnotationError, ModelAnnotation, SchemaError, SelfQual,
};
use uq_core::{AnnotationItem, LabelSchema};

use crate::formats::{AnnotationRecord, SchemaFile};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{location}: {detail}")]
    Parse { path: String, location: String, detail: String },
    #[error("{path}: schema needs at least 2 classes")]
    TooFewClasses { path: String },
    #[error("{path}: duplicate class name or answer token: {detail}")]
    DuplicateClass { path: String, detail: String },
    #[error("{path} line {line}: unknown qualitative level {word:?}")]
    UnknownQualLevel { path: String, line: usize, word: String },
    #[error("{path} row {row}: gold label {label:?} is not a class of schema {task}")]
    UnknownGoldLabel { path: String, row: usize, label: String, task: String },
    #[error("annotation for unknown item {item_id:?} from model {model_id:?}")]
    UnknownItem { model_id: String, item_id: String },
    #[error("duplicate annotation for ({model_id}, {item_id})")]
    DuplicateAnnotation { model_id: String, item_id: String },
    #[error("invalid annotation for ({model_id}, {item_id}): {reason}")]
    InvalidAnnotation { model_id: String, item_id: String, reason: AnnotationError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io { path: path.display().to_string(), source }
}

/// Loads and validates a schema file (JSON).
pub fn load_schema(path: &Path) -> Result<LabelSchema, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: SchemaFile = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        path: path.display().to_string(),
        location: format!("{}:{}", e.line(), e.column()),
        detail: e.to_string(),
    })?;
    file.into_schema().map_err(|e| match e {
        SchemaError::TooFewClasses { .. } => {
            IngestError::TooFewClasses { path: path.display().to_string() }
        }
        other => IngestError::DuplicateClass {
            path: path.display().to_string(),
            detail: other.to_string(),
        },
    })
}

pub fn save_schema(path: &Path, schema: &LabelSchema) -> Result<(), IngestError> {
    let text = serde_json::to_string_pretty(&SchemaFile::from_schema(schema))
        .expect("schema serializes");
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Loads a line-delimited annotation file. In strict mode an unknown
/// qualitative word is an error; lenient mode drops it and keeps going.
pub fn load_annotations(path: &Path, strict: bool) -> Result<Vec<ModelAnnotation>, IngestError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut annotations = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotationRecord =
            serde_json::from_str(&line).map_err(|e| IngestError::Parse {
                path: path.display().to_string(),
                location: format!("line {}", idx + 1),
                detail: e.to_string(),
            })?;
        match record.into_annotation() {
            Ok(ann) => annotations.push(ann),
            Err(word) if strict => {
                return Err(IngestError::UnknownQualLevel {
                    path: path.display().to_string(),
                    line: idx + 1,
                    word,
                });
            }
            Err(_) => {
                // lenient: reparse without the qualitative field
                let mut record: AnnotationRecord =
                    serde_json::from_str(&line).expect("parsed once already");
                record.self_qual = None;
                annotations.push(record.into_annotation().expect("qual cleared"));
            }
        }
    }
    Ok(annotations)
}

pub fn save_annotations(path: &Path, annotations: &[ModelAnnotation]) -> Result<(), IngestError> {
    let mut out = fs::File::create(path).map_err(|e| io_err(path, e))?;
    for ann in annotations {
        let line = serde_json::to_string(&AnnotationRecord::from_annotation(ann))
            .expect("annotation serializes");
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// The supported source-dataset layouts. Each is a delimiter-separated
/// file with a header row; the column names are the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// Columns `text,label`; `label` may be empty or absent.
    GenericCsv,
    /// Stance benchmark layout: columns `target,text,stance`.
    StanceCsv,
    /// Ideology sentences: columns `sentence,leaning`.
    IbcSentences,
    /// Frame-detection headlines: columns `headline,frame`.
    GvfcHeadlines,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "generic_csv" | "generic" => Ok(DatasetFormat::GenericCsv),
            "stance_csv" | "stance" => Ok(DatasetFormat::StanceCsv),
            "ibc_sentences" | "ibc" => Ok(DatasetFormat::IbcSentences),
            "gvfc_headlines" | "gvfc" => Ok(DatasetFormat::GvfcHeadlines),
            other => Err(format!(
                "unknown dataset format {other:?} (expected generic_csv, stance_csv, ibc_sentences, or gvfc_headlines)"
            )),
        }
    }
}

impl DatasetFormat {
    fn text_columns(&self) -> &'static [&'static str] {
        match self {
            DatasetFormat::GenericCsv => &["text"],
            DatasetFormat::StanceCsv => &["target", "text"],
            DatasetFormat::IbcSentences => &["sentence"],
            DatasetFormat::GvfcHeadlines => &["headline"],
        }
    }

    fn label_column(&self) -> &'static str {
        match self {
            DatasetFormat::GenericCsv => "label",
            DatasetFormat::StanceCsv => "stance",
            DatasetFormat::IbcSentences => "leaning",
            DatasetFormat::GvfcHeadlines => "frame",
        }
    }
}

/// Stable item id: zero-padded row index plus a short content hash, so
/// ids survive re-loads and collide only if the file itself changes.
pub fn item_id_for(row: usize, text: &str, gold: Option<&str>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.update([0x1f]);
    hasher.update(gold.unwrap_or("").as_bytes());
    let digest = hasher.finalize();
    format!("{row:05}-{}", hex::encode(&digest[..4]))
}

/// Reads a source dataset into items with deterministic ids and gold
/// labels mapped (case-insensitively) onto schema class names.
pub fn adapt_dataset(
    path: &Path,
    format: DatasetFormat,
    schema: &LabelSchema,
) -> Result<Vec<AnnotationItem>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::Parse {
            path: path.display().to_string(),
            location: "header".into(),
            detail: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Parse {
            path: path.display().to_string(),
            location: "header".into(),
            detail: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut text_cols = Vec::new();
    for name in format.text_columns() {
        match col(name) {
            Some(i) => text_cols.push(i),
            None => {
                return Err(IngestError::Parse {
                    path: path.display().to_string(),
                    location: "header".into(),
                    detail: format!("missing required column {name:?}"),
                });
            }
        }
    }
    let label_col = col(format.label_column());

    let mut items = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1; // 1-based, header excluded
        let record = record.map_err(|e| IngestError::Parse {
            path: path.display().to_string(),
            location: format!("row {row}"),
            detail: e.to_string(),
        })?;
        let parts: Vec<&str> = text_cols
            .iter()
            .map(|&i| record.get(i).unwrap_or("").trim())
            .collect();
        let text = match format {
            DatasetFormat::StanceCsv => format!("[{}] {}", parts[0], parts[1]),
            _ => parts[0].to_string(),
        };
        if parts.iter().any(|p| p.is_empty()) {
            return Err(IngestError::Parse {
                path: path.display().to_string(),
                location: format!("row {row}"),
                detail: "empty text field".into(),
            });
        }
        let gold_raw = label_col.and_then(|i| record.get(i)).map(str::trim).unwrap_or("");
        let gold_label = if gold_raw.is_empty() {
            None
        } else {
            let class = schema
                .classes
                .iter()
                .find(|c| c.name.eq_ignore_ascii_case(gold_raw))
                .ok_or_else(|| IngestError::UnknownGoldLabel {
                    path: path.display().to_string(),
                    row,
                    label: gold_raw.to_string(),
                    task: schema.task_id.clone(),
                })?;
            Some(class.name.clone())
        };
        items.push(AnnotationItem {
            item_id: item_id_for(row, &text, gold_label.as_deref()),
            text,
            gold_label,
        });
    }
    Ok(items)
}

/// A fully validated dataset: schema, items, and annotations keyed by
/// (model, item).
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub schema: LabelSchema,
    pub items: Vec<AnnotationItem>,
    pub annotations: BTreeMap<(String, String), ModelAnnotation>,
}

impl DatasetBundle {
    /// Assembles and validates a bundle: every annotation must reference
    /// an existing item, appear once per (model, item), and pass
    /// annotation validation (which also floor-completes logprobs).
    pub fn assemble(
        schema: LabelSchema,
        items: Vec<AnnotationItem>,
        annotations: Vec<ModelAnnotation>,
        floor: f64,
    ) -> Result<Self, IngestError> {
        let mut map = BTreeMap::new();
        for ann in annotations {
            if !items.iter().any(|i| i.item_id == ann.item_id) {
                return Err(IngestError::UnknownItem {
                    model_id: ann.model_id,
                    item_id: ann.item_id,
                });
            }
            let key = (ann.model_id.clone(), ann.item_id.clone());
            let validated = validate_annotation(ann, &schema, floor).map_err(|e| {
                IngestError::InvalidAnnotation {
                    model_id: key.0.clone(),
                    item_id: key.1.clone(),
                    reason: e,
                }
            })?;
            if map.insert(key.clone(), validated).is_some() {
                return Err(IngestError::DuplicateAnnotation { model_id: key.0, item_id: key.1 });
            }
        }
        Ok(DatasetBundle { schema, items, annotations: map })
    }

    /// Annotations regrouped by item, for scoring.
    pub fn annotations_by_item(&self) -> BTreeMap<String, Vec<ModelAnnotation>> {
        let mut by_item: BTreeMap<String, Vec<ModelAnnotation>> = BTreeMap::new();
        for ((_, item_id), ann) in &self.annotations {
            by_item.entry(item_id.clone()).or_default().push(ann.clone());
        }
        by_item
    }

    pub fn model_ids(&self) -> Vec<String> {
        let mut models: Vec<String> =
            self.annotations.keys().map(|(m, _)| m.clone()).collect();
        models.sort();
        models.dedup();
        models
    }
}

/// Parses the five qualitative level words, case-insensitively.
pub fn parse_qual_level(word: &str) -> Option<SelfQual> {
    word.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap as Map;
    use uq_core::model::TokenLogProbs;
    use uq_core::{ClassLabel, DEFAULT_FLOOR_LOGPROB};

    fn schema() -> LabelSchema {
        LabelSchema::new(
            "stance",
            vec![
                ClassLabel { name: "favor".into(), answer_token: "A".into() },
                ClassLabel { name: "against".into(), answer_token: "B".into() },
                ClassLabel { name: "none".into(), answer_token: "C".into() },
            ],
        )
        .unwrap()
    }

    fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn schema_file_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("schema.json");
        save_schema(&p, &schema()).unwrap();
        assert_eq!(load_schema(&p).unwrap(), schema());

        let one = write(
            dir.path(),
            "one.json",
            r#"{"task_id":"t","classes":[{"name":"x","answer_token":"A"}]}"#,
        );
        assert!(matches!(load_schema(&one), Err(IngestError::TooFewClasses { .. })));

        let dup = write(
            dir.path(),
            "dup.json",
            r#"{"task_id":"t","classes":[{"name":"x","answer_token":"A"},{"name":"y","answer_token":"A"}]}"#,
        );
        assert!(matches!(load_schema(&dup), Err(IngestError::DuplicateClass { .. })));

        let bad = write(dir.path(), "bad.json", "{nope");
        assert!(matches!(load_schema(&bad), Err(IngestError::Parse { .. })));
    }

    #[test]
    fn annotations_parse_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let good = r#"{"model_id":"m","item_id":"i","chosen_token":"A","logprobs":{"A":-0.1},"self_qual":"HIGH"}"#;
        let p = write(dir.path(), "a.jsonl", &format!("{good}\n"));
        let anns = load_annotations(&p, true).unwrap();
        assert_eq!(anns[0].self_qual, Some(SelfQual::High));

        let missing = r#"{"model_id":"m","item_id":"i","chosen_token":"A"}"#;
        let p = write(dir.path(), "b.jsonl", &format!("{good}\n{missing}\n"));
        let err = load_annotations(&p, true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("logprobs"), "{msg}");

        let odd = r#"{"model_id":"m","item_id":"i","chosen_token":"A","logprobs":{"A":-0.1},"self_qual":"maybe"}"#;
        let p = write(dir.path(), "c.jsonl", &format!("{odd}\n"));
        assert!(matches!(
            load_annotations(&p, true).unwrap_err(),
            IngestError::UnknownQualLevel { line: 1, .. }
        ));
        let lenient = load_annotations(&p, false).unwrap();
        assert_eq!(lenient[0].self_qual, None);
    }

    #[test]
    fn generic_csv_adapter() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.csv",
            "text,label\nfirst item,favor\nsecond item,against\nthird item,\n",
        );
        let items = adapt_dataset(&p, DatasetFormat::GenericCsv, &schema()).unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0].gold_label.as_deref(), Some("favor"));
        assert_eq!(items[2].gold_label, None);
        // deterministic across loads
        let again = adapt_dataset(&p, DatasetFormat::GenericCsv, &schema()).unwrap();
        assert_eq!(items, again);

        let bad = write(dir.path(), "empty.csv", "text,label\n,favor\n");
        let err = adapt_dataset(&bad, DatasetFormat::GenericCsv, &schema()).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");

        let unknown = write(dir.path(), "unknown.csv", "text,label\nhello,neutral\n");
        assert!(matches!(
            adapt_dataset(&unknown, DatasetFormat::GenericCsv, &schema()).unwrap_err(),
            IngestError::UnknownGoldLabel { row: 1, .. }
        ));
    }

    #[test]
    fn stance_adapter_combines_target_and_text() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "s.csv",
            "target,text,stance\nclimate,warming is real,FAVOR\n",
        );
        let items = adapt_dataset(&p, DatasetFormat::StanceCsv, &schema()).unwrap();
        assert_eq!(items[0].text, "[climate] warming is real");
        assert_eq!(items[0].gold_label.as_deref(), Some("favor"));
    }

    #[test]
    fn bundle_assembly_validates() {
        let schema = schema();
        let items = vec![AnnotationItem {
            item_id: "i1".into(),
            text: "t".into(),
            gold_label: None,
        }];
        let ann = ModelAnnotation {
            model_id: "m".into(),
            item_id: "i1".into(),
            chosen_token: "A".into(),
            label_logprobs: TokenLogProbs::new(Map::from([("A".to_string(), -0.1)])),
            self_quant: None,
            self_qual: None,
            raw_response: String::new(),
        };
        let bundle = DatasetBundle::assemble(
            schema.clone(),
            items.clone(),
            vec![ann.clone()],
            DEFAULT_FLOOR_LOGPROB,
        )
        .unwrap();
        // floor completion happened during assembly
        let stored = &bundle.annotations[&("m".to_string(), "i1".to_string())];
        assert_eq!(stored.label_logprobs.entries.len(), 3);

        let mut stray = ann.clone();
        stray.item_id = "nope".into();
        assert!(matches!(
            DatasetBundle::assemble(schema.clone(), items.clone(), vec![stray], -100.0),
            Err(IngestError::UnknownItem { .. })
        ));
        assert!(matches!(
            DatasetBundle::assemble(schema, items, vec![ann.clone(), ann], -100.0),
            Err(IngestError::DuplicateAnnotation { .. })
        ));
    }

    #[test]
    fn annotation_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let schema = schema();
        let mut d = TokenLogProbs::new(Map::from([("A".to_string(), -0.2)]));
        d.floor_complete(&schema, DEFAULT_FLOOR_LOGPROB);
        let ann = ModelAnnotation {
            model_id: "m".into(),
            item_id: "i1".into(),
            chosen_token: "A".into(),
            label_logprobs: d,
            self_quant: Some(70),
            self_qual: Some(SelfQual::Medium),
            raw_response: "A".into(),
        };
        let p = dir.path().join("ann.jsonl");
        save_annotations(&p, std::slice::from_ref(&ann)).unwrap();
        let loaded = load_annotations(&p, true).unwrap();
        assert_eq!(loaded, vec![ann]);
    }
}
