//! Implementations behind the `uqtriage` subcommands. Kept out of
//! `main.rs` so integration tests can drive them directly.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use uq_core::evaluation::{accuracy, recall_at, recall_curve, EvalError};
use uq_core::model::{ModelAnnotation, ScoredItem, Strategy};
use uq_core::report::{render_summary, SummaryEntry};
use uq_core::scoring::{score_dataset, ScoreOptions, SelfReportMode};
use uq_core::triage::{rank_items, select_bottom};
use uq_core::AnnotationItem;

use crate::client::LlmClient;
use crate::config::AppConfig;
use crate::formats::{ScoredRecord, TriageRecord};
use crate::ingestion::{
    adapt_dataset, load_annotations, load_schema, save_annotations, DatasetFormat,
};
use crate::report_io::{export_curve, write_summary, write_triage};

/// What a subcommand did; `failures` drives the process exit code.
#[derive(Debug, Default)]
pub struct CommandOutcome {
    pub failures: usize,
    pub notes: Vec<String>,
}

pub struct AnnotateArgs {
    pub schema: PathBuf,
    pub dataset: PathBuf,
    pub format: DatasetFormat,
    pub output: PathBuf,
}

/// Labels every item with every configured model and writes one
/// annotation record per (model, item).
pub fn cmd_annotate(config: &AppConfig, args: &AnnotateArgs) -> anyhow::Result<CommandOutcome> {
    let schema = load_schema(&args.schema)?;
    let items = adapt_dataset(&args.dataset, args.format, &schema)?;
    if config.models.is_empty() {
        bail!("no models configured; set `models` in the config file");
    }
    let templates = config.templates()?;
    let client = LlmClient::with_http(config.endpoint.clone(), config.floor_logprob, config.seed)?;
    client.check_credentials()?;

    let mut outcome = CommandOutcome::default();
    let mut annotations: Vec<ModelAnnotation> = Vec::new();
    let mut degenerate = 0usize;
    let mut floored = 0usize;
    for model in &config.models {
        let results =
            client.annotate_batch(model, &items, &schema, &templates, config.self_report);
        for (item, result) in items.iter().zip(results) {
            match result {
                Ok(annotated) => {
                    if annotated.degenerate {
                        degenerate += 1;
                    }
                    floored += annotated.annotation.label_logprobs.floor_applied.len();
                    for warning in &annotated.warnings {
                        outcome.notes.push(format!("{model}/{}: {warning}", item.item_id));
                    }
                    annotations.push(annotated.annotation);
                }
                Err(e) => {
                    outcome.failures += 1;
                    outcome.notes.push(format!("{model}/{}: {e}", item.item_id));
                }
            }
        }
    }
    save_annotations(&args.output, &annotations)?;
    eprintln!(
        "annotated {} of {} (models: {}), {} failures, {} degenerate, {} floor substitutions",
        annotations.len(),
        items.len() * config.models.len(),
        config.models.join(", "),
        outcome.failures,
        degenerate,
        floored,
    );
    for note in &outcome.notes {
        eprintln!("  {note}");
    }
    Ok(outcome)
}

pub struct ScoreArgs {
    pub schema: PathBuf,
    pub annotations: PathBuf,
    /// Optional dataset to attach gold labels at scoring time.
    pub dataset: Option<(PathBuf, DatasetFormat)>,
    pub strategies: Vec<Strategy>,
    /// Restrict single-model strategies to one model.
    pub model: Option<String>,
    pub lenient_self_report: bool,
    pub output: PathBuf,
}

/// The ensemble strategy writes records under this model id.
pub const ENSEMBLE_MODEL_ID: &str = "ensemble";

pub fn cmd_score(config: &AppConfig, args: &ScoreArgs) -> anyhow::Result<CommandOutcome> {
    let schema = load_schema(&args.schema)?;
    let annotations = load_annotations(&args.annotations, !args.lenient_self_report)?;
    let items: Vec<AnnotationItem> = match &args.dataset {
        Some((path, format)) => {
            let items = adapt_dataset(path, *format, &schema)?;
            let annotated: std::collections::BTreeSet<&str> =
                annotations.iter().map(|a| a.item_id.as_str()).collect();
            items.into_iter().filter(|i| annotated.contains(i.item_id.as_str())).collect()
        }
        None => {
            // derive bare items from the annotations themselves
            let mut ids: Vec<&str> = annotations.iter().map(|a| a.item_id.as_str()).collect();
            ids.sort();
            ids.dedup();
            ids.iter()
                .map(|id| AnnotationItem {
                    item_id: id.to_string(),
                    text: String::new(),
                    gold_label: None,
                })
                .collect()
        }
    };
    let bundle = crate::ingestion::DatasetBundle::assemble(
        schema.clone(),
        items.clone(),
        annotations,
        config.floor_logprob,
    )?;
    let by_item = bundle.annotations_by_item();
    let models = bundle.model_ids();

    let mode = if args.lenient_self_report {
        SelfReportMode::Lenient
    } else {
        SelfReportMode::Strict
    };
    let mut outcome = CommandOutcome::default();
    let mut records: Vec<ScoredRecord> = Vec::new();
    for &strategy in &args.strategies {
        let runs: Vec<Option<String>> = if strategy == Strategy::CEnsemble {
            vec![None]
        } else {
            match &args.model {
                Some(m) => vec![Some(m.clone())],
                None => models.iter().cloned().map(Some).collect(),
            }
        };
        for model in runs {
            let opts = ScoreOptions { model: model.clone(), self_report_mode: mode };
            match score_dataset(&items, &by_item, strategy, &schema, &opts) {
                Ok(output) => {
                    let model_id = model.unwrap_or_else(|| ENSEMBLE_MODEL_ID.to_string());
                    for flag in &output.flagged {
                        outcome
                            .notes
                            .push(format!("{strategy}/{model_id}/{}: {}", flag.item_id, flag.reason));
                    }
                    for scored in output.scored {
                        records.push(ScoredRecord {
                            model_id: model_id.clone(),
                            item_id: scored.item_id,
                            strategy,
                            score: scored.score,
                            predicted_label: scored.predicted_label,
                            correct: scored.correct,
                        });
                    }
                }
                Err(e) => {
                    outcome.failures += 1;
                    outcome.notes.push(format!(
                        "{strategy}/{}: {e}",
                        model.as_deref().unwrap_or(ENSEMBLE_MODEL_ID)
                    ));
                }
            }
        }
    }
    let mut file = std::fs::File::create(&args.output)
        .with_context(|| format!("create {}", args.output.display()))?;
    for record in &records {
        writeln!(file, "{}", serde_json::to_string(record)?)?;
    }
    eprintln!(
        "scored {} records across {} strategies, {} failures",
        records.len(),
        args.strategies.len(),
        outcome.failures
    );
    for note in &outcome.notes {
        eprintln!("  {note}");
    }
    Ok(outcome)
}

pub struct EvaluateArgs {
    pub scored: PathBuf,
    /// Dataset + schema to (re)attach gold labels; when absent the scored
    /// file must already carry correctness flags.
    pub dataset: Option<(PathBuf, DatasetFormat)>,
    pub schema: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Evaluated fraction reported per strategy (e.g. the bottom 20%).
    pub recall_fraction: f64,
    /// Dataset column label in the summary table.
    pub dataset_name: Option<String>,
}

pub fn cmd_evaluate(_config: &AppConfig, args: &EvaluateArgs) -> anyhow::Result<CommandOutcome> {
    let mut records = load_scored(&args.scored)?;
    let gold: Option<BTreeMap<String, String>> = match (&args.dataset, &args.schema) {
        (Some((path, format)), Some(schema_path)) => {
            let schema = load_schema(schema_path)?;
            let items = adapt_dataset(path, *format, &schema)?;
            Some(
                items
                    .into_iter()
                    .filter_map(|i| i.gold_label.map(|g| (i.item_id, g)))
                    .collect(),
            )
        }
        (Some(_), None) => bail!("--dataset needs --schema to map gold labels"),
        _ => None,
    };
    if let Some(gold) = &gold {
        for record in &mut records {
            record.correct = gold.get(&record.item_id).map(|g| g == &record.predicted_label);
        }
    }

    std::fs::create_dir_all(&args.output_dir)?;
    let mut groups: BTreeMap<(Strategy, String), Vec<ScoredItem>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.strategy, record.model_id.clone()))
            .or_default()
            .push(ScoredItem {
                item_id: record.item_id,
                strategy: record.strategy,
                score: record.score,
                predicted_label: record.predicted_label,
                correct: record.correct,
            });
    }

    let dataset_name = args.dataset_name.clone().unwrap_or_else(|| "task".to_string());
    let mut outcome = CommandOutcome::default();
    let mut entries: Vec<SummaryEntry> = Vec::new();
    let mut recall_lines: Vec<String> = Vec::new();
    for ((strategy, model), scored) in &groups {
        let acc = match accuracy(scored) {
            Ok(a) => Some(a),
            Err(EvalError::MissingCorrectness { .. }) => {
                outcome.failures += 1;
                outcome.notes.push(format!(
                    "{strategy}/{model}: items lack correctness; score with --dataset or pass one here"
                ));
                continue;
            }
            Err(e) => {
                outcome.failures += 1;
                outcome.notes.push(format!("{strategy}/{model}: {e}"));
                continue;
            }
        };
        match recall_curve(scored) {
            Ok(curve) => {
                let path = args.output_dir.join(format!("curve_{strategy}_{model}.csv"));
                export_curve(&curve, &path)?;
                let r = recall_at(&curve, args.recall_fraction)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                recall_lines.push(format!(
                    "recall@{:.2} {strategy}/{model} = {:.4}",
                    args.recall_fraction, r
                ));
                entries.push(SummaryEntry {
                    strategy: *strategy,
                    model: model.clone(),
                    dataset: dataset_name.clone(),
                    auc: curve.auc,
                    accuracy: acc,
                });
            }
            Err(EvalError::NoWrongItems) => {
                outcome
                    .notes
                    .push(format!("{strategy}/{model}: every label correct; no recall curve"));
            }
            Err(e) => {
                outcome.failures += 1;
                outcome.notes.push(format!("{strategy}/{model}: {e}"));
            }
        }
    }
    if !entries.is_empty() {
        let table = render_summary(&entries).map_err(|e| anyhow::anyhow!("{e}"))?;
        write_summary(&table, &args.output_dir)?;
        // append the per-strategy recall readout and any notices
        let summary_path = args.output_dir.join("summary.txt");
        let mut text = std::fs::read_to_string(&summary_path)?;
        text.push('\n');
        for line in &recall_lines {
            text.push_str(line);
            text.push('\n');
        }
        for note in &outcome.notes {
            text.push_str(note);
            text.push('\n');
        }
        std::fs::write(&summary_path, text)?;
    }
    eprintln!(
        "evaluated {} strategy/model groups, {} failures",
        groups.len(),
        outcome.failures
    );
    for note in &outcome.notes {
        eprintln!("  {note}");
    }
    Ok(outcome)
}

pub struct TriageArgs {
    pub scored: PathBuf,
    pub strategy: Option<Strategy>,
    pub model: Option<String>,
    pub fraction: f64,
    /// Dataset + schema to attach source text for the reviewers.
    pub dataset: Option<(PathBuf, DatasetFormat)>,
    pub schema: Option<PathBuf>,
    pub output: PathBuf,
}

pub fn cmd_triage(_config: &AppConfig, args: &TriageArgs) -> anyhow::Result<CommandOutcome> {
    let records = load_scored(&args.scored)?;
    let records: Vec<ScoredRecord> = match args.strategy {
        Some(s) => records.into_iter().filter(|r| r.strategy == s).collect(),
        None => records,
    };
    let records: Vec<ScoredRecord> = match &args.model {
        Some(m) => records.into_iter().filter(|r| &r.model_id == m).collect(),
        None => records,
    };
    if records.is_empty() {
        bail!("no scored records match the strategy/model filter");
    }
    let model_ids: std::collections::BTreeSet<&str> =
        records.iter().map(|r| r.model_id.as_str()).collect();
    if model_ids.len() > 1 {
        bail!(
            "scored records span several models ({}); pick one with --model",
            model_ids.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    let model_id = records[0].model_id.clone();

    let texts: BTreeMap<String, String> = match (&args.dataset, &args.schema) {
        (Some((path, format)), Some(schema_path)) => {
            let schema = load_schema(schema_path)?;
            adapt_dataset(path, *format, &schema)?
                .into_iter()
                .map(|i| (i.item_id, i.text))
                .collect()
        }
        (Some(_), None) => bail!("--dataset needs --schema"),
        _ => BTreeMap::new(),
    };

    let scored: Vec<ScoredItem> = records
        .iter()
        .map(|r| ScoredItem {
            item_id: r.item_id.clone(),
            strategy: r.strategy,
            score: r.score,
            predicted_label: r.predicted_label.clone(),
            correct: r.correct,
        })
        .collect();
    let ranked = rank_items(&scored).map_err(|e| anyhow::anyhow!("{e}"))?;
    let bottom = select_bottom(&ranked, args.fraction).map_err(|e| anyhow::anyhow!("{e}"))?;
    let triage: Vec<TriageRecord> = bottom
        .iter()
        .enumerate()
        .map(|(i, s)| TriageRecord {
            rank: i + 1,
            item_id: s.item_id.clone(),
            score: s.score,
            predicted_label: s.predicted_label.clone(),
            strategy: s.strategy,
            model_id: model_id.clone(),
            text: texts.get(&s.item_id).cloned().unwrap_or_default(),
        })
        .collect();
    write_triage(&triage, &args.output)?;
    eprintln!(
        "selected {} of {} items for review (fraction {})",
        triage.len(),
        ranked.len(),
        args.fraction
    );
    Ok(CommandOutcome::default())
}

/// Reads a scored file, with line numbers in parse errors.
pub fn load_scored(path: &Path) -> anyhow::Result<Vec<ScoredRecord>> {
    let file = std::fs::File::open(path).with_context(|| format!("open {}", path.display()))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoredRecord = serde_json::from_str(&line)
            .with_context(|| format!("{} line {}", path.display(), idx + 1))?;
        records.push(record);
    }
    Ok(records)
}
