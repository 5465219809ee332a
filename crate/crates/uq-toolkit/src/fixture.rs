//! Seeded synthetic fixtures for demos and offline runs: a stance-style
//! dataset where each model's chance of labeling an item correctly is a
//! monotone (logistic) function of the confidence gap generated for it,
//! plus a prerecorded replay cache so the full pipeline runs without a
//! network.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use uq_core::model::{ModelAnnotation, SelfQual, TokenLogProbs};
use uq_core::{AnnotationItem, ClassLabel, LabelSchema};

use crate::client::{
    followup_request, label_request, request_fingerprint, append_cache_entry, PromptTemplates,
};
use crate::ingestion::item_id_for;

pub const FIXTURE_MODELS: [&str; 3] = ["gpt-like", "flan-like", "llama-like"];

#[derive(Debug, Clone)]
pub struct SyntheticFixture {
    pub schema: LabelSchema,
    pub items: Vec<AnnotationItem>,
    /// Annotations grouped by item id, one per model, in model order.
    pub annotations: BTreeMap<String, Vec<ModelAnnotation>>,
}

pub fn stance_schema() -> LabelSchema {
    LabelSchema::new(
        "stance",
        vec![
            ClassLabel { name: "favor".into(), answer_token: "A".into() },
            ClassLabel { name: "against".into(), answer_token: "B".into() },
            ClassLabel { name: "none".into(), answer_token: "C".into() },
        ],
    )
    .expect("static schema is valid")
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Generates `n_items` items labeled by the three fixture models.
///
/// Per (item, model) a confidence gap is drawn and the model answers
/// correctly with probability `sigmoid(gap + bias)`, so low-gap
/// annotations are disproportionately wrong and confidence-ranked triage
/// has signal to find.
pub fn synthetic_fixture(seed: u64, n_items: usize) -> SyntheticFixture {
    let schema = stance_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_names: Vec<&str> = schema.classes.iter().map(|c| c.name.as_str()).collect();
    let biases = [-0.3f64, -0.6, -0.9]; // per-model skill offsets

    let mut items = Vec::with_capacity(n_items);
    let mut annotations: BTreeMap<String, Vec<ModelAnnotation>> = BTreeMap::new();
    for row in 0..n_items {
        let gold_idx = rng.gen_range(0..class_names.len());
        let gold = class_names[gold_idx];
        let text = format!("synthetic statement {row:03} on the debated topic");
        let item_id = item_id_for(row + 1, &text, Some(gold));
        let mut item_annotations = Vec::with_capacity(FIXTURE_MODELS.len());
        for (m, model) in FIXTURE_MODELS.iter().enumerate() {
            // gap ~ Exp(1) scaled; strictly positive so argmax is unique
            let gap: f64 = -(rng.gen_range(1e-9f64..1.0)).ln() * 1.5 + 1e-6;
            let p_correct = sigmoid(gap + biases[m]);
            let correct = rng.gen_bool(p_correct);
            let predicted_idx = if correct {
                gold_idx
            } else {
                let offset = rng.gen_range(1..class_names.len());
                (gold_idx + offset) % class_names.len()
            };
            let chosen = schema.classes[predicted_idx].answer_token.clone();
            let top = -0.05 - rng.gen_range(0.0..0.4);
            let mut entries = BTreeMap::new();
            let mut lower = top - gap;
            for (idx, class) in schema.classes.iter().enumerate() {
                if idx == predicted_idx {
                    entries.insert(class.answer_token.clone(), top);
                } else {
                    entries.insert(class.answer_token.clone(), lower);
                    lower -= 1.0 + rng.gen_range(0.0..0.5);
                }
            }
            // self-reports track the gap with noise, staying monotone on average
            let reported = sigmoid(gap - 0.8) * 100.0 + rng.gen_range(-10.0..10.0);
            let quant = reported.clamp(0.0, 100.0).round() as u32;
            let qual = match quant {
                0..=19 => SelfQual::No,
                20..=39 => SelfQual::Low,
                40..=59 => SelfQual::Medium,
                60..=84 => SelfQual::High,
                _ => SelfQual::Absolute,
            };
            item_annotations.push(ModelAnnotation {
                model_id: model.to_string(),
                item_id: item_id.clone(),
                chosen_token: chosen.clone(),
                label_logprobs: TokenLogProbs::new(entries),
                self_quant: Some(quant),
                self_qual: Some(qual),
                raw_response: chosen,
            });
        }
        annotations.insert(item_id.clone(), item_annotations);
        items.push(AnnotationItem { item_id, text, gold_label: Some(gold.to_string()) });
    }
    SyntheticFixture { schema, items, annotations }
}

/// Writes the fixture as pipeline inputs into `dir`: `schema.json`,
/// `dataset.csv` (generic text,label layout), `cache.jsonl` holding
/// every exchange the replay-mode pipeline will ask for, and a
/// `config.toml` pointing at them.
pub fn write_replay_fixture(
    dir: &Path,
    fixture: &SyntheticFixture,
    seed: u64,
) -> std::io::Result<()> {
    let templates = PromptTemplates::default();
    crate::ingestion::save_schema(&dir.join("schema.json"), &fixture.schema)
        .map_err(|e| std::io::Error::other(e.to_string()))?;

    let mut csv = String::from("text,label\n");
    for item in &fixture.items {
        csv.push_str(&format!(
            "{},{}\n",
            item.text,
            item.gold_label.as_deref().unwrap_or("")
        ));
    }
    std::fs::write(dir.join("dataset.csv"), csv)?;

    let cache_path = dir.join("cache.jsonl");
    if cache_path.exists() {
        std::fs::remove_file(&cache_path)?;
    }
    for item in &fixture.items {
        for ann in &fixture.annotations[&item.item_id] {
            let label_req =
                label_request(&ann.model_id, item, &fixture.schema, &templates, 0.0, 5);
            let top_logprobs: Vec<_> = ann
                .label_logprobs
                .entries
                .iter()
                .map(|(token, lp)| json!({"token": token, "logprob": lp}))
                .collect();
            let label_body = json!({
                "choices": [{
                    "message": {"role": "assistant", "content": ann.chosen_token},
                    "logprobs": {"content": [{
                        "token": ann.chosen_token,
                        "logprob": ann.label_logprobs.entries[&ann.chosen_token],
                        "top_logprobs": top_logprobs,
                    }]}
                }]
            });
            append_cache_entry(
                &cache_path,
                &request_fingerprint(&label_req),
                &label_body.to_string(),
            )?;

            let quant_req = followup_request(
                &ann.model_id,
                item,
                &fixture.schema,
                &templates,
                &templates.quant,
                &ann.chosen_token,
                0.0,
            );
            let quant_body = json!({
                "choices": [{"message": {
                    "role": "assistant",
                    "content": format!("Confidence: {}", ann.self_quant.unwrap_or(0)),
                }}]
            });
            append_cache_entry(
                &cache_path,
                &request_fingerprint(&quant_req),
                &quant_body.to_string(),
            )?;

            let qual_req = followup_request(
                &ann.model_id,
                item,
                &fixture.schema,
                &templates,
                &templates.qual,
                &ann.chosen_token,
                0.0,
            );
            let qual_body = json!({
                "choices": [{"message": {
                    "role": "assistant",
                    "content": ann.self_qual.map(|q| q.as_str()).unwrap_or("no"),
                }}]
            });
            append_cache_entry(
                &cache_path,
                &request_fingerprint(&qual_req),
                &qual_body.to_string(),
            )?;
        }
    }

    let config = format!(
        "seed = {seed}\nself_report = true\nmodels = [\"{}\"]\n\n[endpoint]\nbase_url = \"http://unused.invalid/v1\"\nmode = \"replay\"\ncache_path = \"{}\"\ntop_k = 5\ntemperature = 0.0\n",
        FIXTURE_MODELS.join("\", \""),
        cache_path.display(),
    );
    std::fs::write(dir.join("config.toml"), config)?;
    Ok(())
}
