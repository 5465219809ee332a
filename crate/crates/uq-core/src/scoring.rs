//! The five confidence strategies, as pure functions from annotations to
//! scores.
//!
//! Single-model strategies: self-reported confidence (qualitative words or
//! a 0-100 number), the probability of the chosen token (log inverse), and
//! the gap between the top two label-token logprobs (confidence score).
//! The ensemble strategy sums confidence scores across models that agree
//! on a label and picks the label with the largest sum.
//!
//! Scores are comparable within a strategy only; ranking is what matters
//! downstream.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    AnnotationItem, LabelSchema, ModelAnnotation, ScoredItem, SelfQual, Strategy, TokenLogProbs,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreError {
    /// Quantitative self-report outside [0, 100].
    RangeError { value: u32 },
    /// Logprob above zero passed to `log_inverse`.
    DomainError { value: f64 },
    /// A top-two gap needs at least two tokens.
    TooFewTokens { found: usize },
    EmptyEnsemble,
    /// Ensemble annotations from different items.
    MixedItems { expected: String, found: String },
    /// The same model appears twice in one ensemble.
    DuplicateModel { model_id: String },
    /// Chosen token not present in the schema.
    UnknownToken { token: String },
    /// Items with no usable annotation for the strategy.
    MissingAnnotation { item_ids: Vec<String> },
    /// Self-report strategy selected but the field is absent (strict mode).
    MissingSelfReport { strategy: Strategy, item_ids: Vec<String> },
    /// Single-model strategy over a multi-model batch with no model named.
    ModelRequired { available: Vec<String> },
}

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreError::RangeError { value } => {
                write!(f, "quantitative self-report {value} outside [0, 100]")
            }
            ScoreError::DomainError { value } => {
                write!(f, "logprob {value} is above zero")
            }
            ScoreError::TooFewTokens { found } => {
                write!(f, "confidence score needs at least 2 tokens, found {found}")
            }
            ScoreError::EmptyEnsemble => write!(f, "ensemble over zero annotations"),
            ScoreError::MixedItems { expected, found } => {
                write!(f, "ensemble mixes items {expected:?} and {found:?}")
            }
            ScoreError::DuplicateModel { model_id } => {
                write!(f, "model {model_id:?} appears more than once in the ensemble")
            }
            ScoreError::UnknownToken { token } => {
                write!(f, "token {token:?} is not in the label schema")
            }
            ScoreError::MissingAnnotation { item_ids } => {
                write!(f, "no usable annotation for items: {}", item_ids.join(", "))
            }
            ScoreError::MissingSelfReport { strategy, item_ids } => write!(
                f,
                "strategy {strategy} needs a self-report missing for items: {}",
                item_ids.join(", ")
            ),
            ScoreError::ModelRequired { available } => write!(
                f,
                "single-model strategy over several models; pick one of: {}",
                available.join(", ")
            ),
        }
    }
}

/// Maps a qualitative self-report level to its numeric score:
/// no -> 0, low -> 0.25, medium -> 0.5, high -> 0.75, absolute -> 1.
pub fn map_qualitative(level: SelfQual) -> f64 {
    match level {
        SelfQual::No => 0.0,
        SelfQual::Low => 0.25,
        SelfQual::Medium => 0.5,
        SelfQual::High => 0.75,
        SelfQual::Absolute => 1.0,
    }
}

/// Scales a 0-100 quantitative self-report to [0, 1].
pub fn normalize_quantitative(value: u32) -> Result<f64, ScoreError> {
    if value > 100 {
        return Err(ScoreError::RangeError { value });
    }
    Ok(value as f64 / 100.0)
}

/// Probability of a token from its log probability.
pub fn log_inverse(logp: f64) -> Result<f64, ScoreError> {
    if logp > 0.0 {
        return Err(ScoreError::DomainError { value: logp });
    }
    Ok(libm::exp(logp))
}

/// Absolute gap between the highest and second-highest label-token
/// logprobs. Zero when the top two are tied; larger means more confident.
pub fn confidence_score(dist: &TokenLogProbs) -> Result<f64, ScoreError> {
    let n = dist.entries.len();
    if n < 2 {
        return Err(ScoreError::TooFewTokens { found: n });
    }
    let mut top = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &lp in dist.entries.values() {
        if lp > top {
            second = top;
            top = lp;
        } else if lp > second {
            second = lp;
        }
    }
    Ok((top - second).abs())
}

/// Outcome of aggregating one item's annotations across models.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub chosen_label: String,
    /// Sum of confidence scores over the models that predicted
    /// `chosen_label`.
    pub c_agg: f64,
    /// Models that predicted `chosen_label`, in input order.
    pub agreeing_models: Vec<String>,
    /// Summed confidence per candidate label (labels predicted by >= 1
    /// model only).
    pub candidate_sums: BTreeMap<String, f64>,
}

/// Sums per-model confidence scores by predicted label and picks the label
/// with the largest sum. Ties: more agreeing models first, then earliest
/// schema class order.
pub fn confidence_ensemble(
    annotations: &[ModelAnnotation],
    schema: &LabelSchema,
) -> Result<EnsembleResult, ScoreError> {
    let first = annotations.first().ok_or(ScoreError::EmptyEnsemble)?;
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    let mut voters: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut seen_models: Vec<&str> = Vec::new();
    for ann in annotations {
        if ann.item_id != first.item_id {
            return Err(ScoreError::MixedItems {
                expected: first.item_id.clone(),
                found: ann.item_id.clone(),
            });
        }
        if seen_models.contains(&ann.model_id.as_str()) {
            return Err(ScoreError::DuplicateModel { model_id: ann.model_id.clone() });
        }
        seen_models.push(&ann.model_id);
        let class = schema
            .class_for_token(&ann.chosen_token)
            .ok_or_else(|| ScoreError::UnknownToken { token: ann.chosen_token.clone() })?;
        let c = confidence_score(&ann.label_logprobs)?;
        *sums.entry(class.name.clone()).or_insert(0.0) += c;
        voters.entry(class.name.clone()).or_default().push(ann.model_id.clone());
    }
    let chosen = sums
        .iter()
        .map(|(label, &sum)| {
            let votes = voters[label].len();
            let rank = schema.class_rank(label).unwrap_or(usize::MAX);
            (label.clone(), sum, votes, rank)
        })
        .max_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.2.cmp(&b.2))
                // lower schema rank wins the final tie
                .then(b.3.cmp(&a.3))
        })
        .expect("at least one candidate");
    Ok(EnsembleResult {
        c_agg: chosen.1,
        agreeing_models: voters.remove(&chosen.0).unwrap_or_default(),
        chosen_label: chosen.0,
        candidate_sums: sums,
    })
}

/// Strict mode errors on a missing self-report; lenient mode scores it 0
/// and flags the item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfReportMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    /// Model whose annotations feed the single-model strategies. May be
    /// omitted when only one model is present.
    pub model: Option<String>,
    pub self_report_mode: SelfReportMode,
}

/// An item that was scored despite a degraded input.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFlag {
    pub item_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreOutput {
    /// One entry per input item, in input order.
    pub scored: Vec<ScoredItem>,
    pub flagged: Vec<ScoreFlag>,
}

/// Scores every item under one strategy. Items missing a required input
/// are collected and reported in the error rather than dropped.
pub fn score_dataset(
    items: &[AnnotationItem],
    annotations: &BTreeMap<String, Vec<ModelAnnotation>>,
    strategy: Strategy,
    schema: &LabelSchema,
    opts: &ScoreOptions,
) -> Result<ScoreOutput, ScoreError> {
    let model = match strategy {
        Strategy::CEnsemble => None,
        _ => Some(resolve_model(annotations, opts)?),
    };
    let mut out = ScoreOutput::default();
    let mut missing: Vec<String> = Vec::new();
    let mut no_report: Vec<String> = Vec::new();
    for item in items {
        let anns = annotations.get(&item.item_id).map(Vec::as_slice).unwrap_or(&[]);
        let picked: Vec<&ModelAnnotation> = match &model {
            Some(m) => anns.iter().filter(|a| &a.model_id == m).collect(),
            None => anns.iter().collect(),
        };
        if picked.is_empty() {
            missing.push(item.item_id.clone());
            continue;
        }
        let (score, predicted_label) = match strategy {
            Strategy::CEnsemble => {
                let owned: Vec<ModelAnnotation> = picked.iter().map(|a| (*a).clone()).collect();
                let r = confidence_ensemble(&owned, schema)?;
                (r.c_agg, r.chosen_label)
            }
            _ => {
                let ann = picked[0];
                let label = schema
                    .class_for_token(&ann.chosen_token)
                    .ok_or_else(|| ScoreError::UnknownToken { token: ann.chosen_token.clone() })?
                    .name
                    .clone();
                let score = match strategy {
                    Strategy::Qualitative => match ann.self_qual {
                        Some(level) => map_qualitative(level),
                        None => match opts.self_report_mode {
                            SelfReportMode::Strict => {
                                no_report.push(item.item_id.clone());
                                continue;
                            }
                            SelfReportMode::Lenient => {
                                out.flagged.push(ScoreFlag {
                                    item_id: item.item_id.clone(),
                                    reason: "missing qualitative self-report".to_string(),
                                });
                                0.0
                            }
                        },
                    },
                    Strategy::Quantitative => match ann.self_quant {
                        Some(v) => normalize_quantitative(v)?,
                        None => match opts.self_report_mode {
                            SelfReportMode::Strict => {
                                no_report.push(item.item_id.clone());
                                continue;
                            }
                            SelfReportMode::Lenient => {
                                out.flagged.push(ScoreFlag {
                                    item_id: item.item_id.clone(),
                                    reason: "missing quantitative self-report".to_string(),
                                });
                                0.0
                            }
                        },
                    },
                    Strategy::LogInverse => {
                        let lp = *ann
                            .label_logprobs
                            .entries
                            .get(&ann.chosen_token)
                            .expect("chosen token has a logprob after validation");
                        log_inverse(lp)?
                    }
                    Strategy::CScore => confidence_score(&ann.label_logprobs)?,
                    Strategy::CEnsemble => unreachable!(),
                };
                (score, label)
            }
        };
        out.scored.push(ScoredItem {
            item_id: item.item_id.clone(),
            strategy,
            score,
            predicted_label: predicted_label.clone(),
            correct: item.gold_label.as_ref().map(|gold| gold == &predicted_label),
        });
    }
    if !missing.is_empty() {
        return Err(ScoreError::MissingAnnotation { item_ids: missing });
    }
    if !no_report.is_empty() {
        return Err(ScoreError::MissingSelfReport { strategy, item_ids: no_report });
    }
    Ok(out)
}

fn resolve_model(
    annotations: &BTreeMap<String, Vec<ModelAnnotation>>,
    opts: &ScoreOptions,
) -> Result<String, ScoreError> {
    if let Some(m) = &opts.model {
        return Ok(m.clone());
    }
    let mut models: Vec<String> = annotations
        .values()
        .flatten()
        .map(|a| a.model_id.clone())
        .collect();
    models.sort();
    models.dedup();
    match models.len() {
        1 => Ok(models.pop().unwrap()),
        _ => Err(ScoreError::ModelRequired { available: models }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClassLabel, Strategy, DEFAULT_FLOOR_LOGPROB};
    use alloc::vec;
    use proptest::prelude::*;

    fn schema3() -> LabelSchema {
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

    fn dist(pairs: &[(&str, f64)]) -> TokenLogProbs {
        TokenLogProbs::new(pairs.iter().map(|(t, lp)| (t.to_string(), *lp)).collect())
    }

    fn ann(model: &str, item: &str, chosen: &str, pairs: &[(&str, f64)]) -> ModelAnnotation {
        ModelAnnotation {
            model_id: model.into(),
            item_id: item.into(),
            chosen_token: chosen.into(),
            label_logprobs: dist(pairs),
            self_quant: None,
            self_qual: None,
            raw_response: String::new(),
        }
    }

    #[test]
    fn qualitative_mapping_is_exact() {
        assert_eq!(map_qualitative(SelfQual::No), 0.0);
        assert_eq!(map_qualitative(SelfQual::Low), 0.25);
        assert_eq!(map_qualitative(SelfQual::Medium), 0.5);
        assert_eq!(map_qualitative(SelfQual::High), 0.75);
        assert_eq!(map_qualitative(SelfQual::Absolute), 1.0);
    }

    #[test]
    fn quantitative_normalization() {
        assert_eq!(normalize_quantitative(100).unwrap(), 1.0);
        assert_eq!(normalize_quantitative(0).unwrap(), 0.0);
        assert_eq!(normalize_quantitative(73).unwrap(), 0.73);
        assert_eq!(normalize_quantitative(150).unwrap_err(), ScoreError::RangeError { value: 150 });
    }

    #[test]
    fn log_inverse_exponentiation() {
        assert_eq!(log_inverse(0.0).unwrap(), 1.0);
        assert!((log_inverse(0.5f64.ln()).unwrap() - 0.5).abs() < 1e-12);
        assert!(log_inverse(0.1).is_err());
    }

    #[test]
    fn confidence_score_top_two_gap() {
        assert!((confidence_score(&dist(&[("A", -0.1), ("B", -2.3)])).unwrap() - 2.2).abs() < 1e-12);
        assert_eq!(confidence_score(&dist(&[("A", -1.0), ("B", -1.0)])).unwrap(), 0.0);
        let d = dist(&[("A", -0.5), ("B", -3.0), ("C", -1.0)]);
        assert!((confidence_score(&d).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(
            confidence_score(&dist(&[("A", -0.5)])).unwrap_err(),
            ScoreError::TooFewTokens { found: 1 }
        );
    }

    #[test]
    fn ensemble_sums_agreeing_models() {
        let schema = schema3();
        // M1, M2 -> favor with C = 2.0 and 1.5; M3 -> against with C = 3.0
        let anns = vec![
            ann("m1", "i", "A", &[("A", -0.5), ("B", -2.5), ("C", -3.0)]),
            ann("m2", "i", "A", &[("A", -1.0), ("B", -2.5), ("C", -4.0)]),
            ann("m3", "i", "B", &[("B", -0.5), ("A", -3.5), ("C", -4.0)]),
        ];
        let r = confidence_ensemble(&anns, &schema).unwrap();
        assert_eq!(r.chosen_label, "favor");
        assert!((r.c_agg - 3.5).abs() < 1e-12);
        assert_eq!(r.agreeing_models, vec!["m1", "m2"]);
        assert!((r.candidate_sums["favor"] - 3.5).abs() < 1e-12);
        assert!((r.candidate_sums["against"] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ensemble_single_model_degenerates_to_c_score() {
        let schema = schema3();
        let a = ann("m1", "i", "B", &[("B", -0.3), ("A", -1.0), ("C", -2.0)]);
        let r = confidence_ensemble(core::slice::from_ref(&a), &schema).unwrap();
        assert_eq!(r.chosen_label, "against");
        assert!((r.c_agg - confidence_score(&a.label_logprobs).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ensemble_rejects_bad_input() {
        let schema = schema3();
        assert_eq!(confidence_ensemble(&[], &schema).unwrap_err(), ScoreError::EmptyEnsemble);
        let anns = vec![
            ann("m1", "i1", "A", &[("A", -0.5), ("B", -2.5)]),
            ann("m2", "i2", "A", &[("A", -0.5), ("B", -2.5)]),
        ];
        assert!(matches!(
            confidence_ensemble(&anns, &schema).unwrap_err(),
            ScoreError::MixedItems { .. }
        ));
        let anns = vec![
            ann("m1", "i", "A", &[("A", -0.5), ("B", -2.5)]),
            ann("m1", "i", "A", &[("A", -0.5), ("B", -2.5)]),
        ];
        assert!(matches!(
            confidence_ensemble(&anns, &schema).unwrap_err(),
            ScoreError::DuplicateModel { .. }
        ));
    }

    #[test]
    fn ensemble_tie_prefers_more_voters_then_schema_order() {
        let schema = schema3();
        // against gets 2.0 from one model, favor gets 1.0 + 1.0 from two
        let anns = vec![
            ann("m1", "i", "A", &[("A", -0.5), ("B", -1.5), ("C", -3.0)]),
            ann("m2", "i", "A", &[("A", -0.5), ("B", -1.5), ("C", -3.0)]),
            ann("m3", "i", "B", &[("B", -0.5), ("A", -2.5), ("C", -4.0)]),
        ];
        let r = confidence_ensemble(&anns, &schema).unwrap();
        assert_eq!(r.chosen_label, "favor");
        assert_eq!(r.agreeing_models.len(), 2);

        // exact sum tie with equal voters: schema order wins (favor < none)
        let anns = vec![
            ann("m1", "i", "C", &[("C", -0.5), ("A", -1.5), ("B", -3.0)]),
            ann("m2", "i", "A", &[("A", -0.5), ("B", -1.5), ("C", -3.0)]),
        ];
        let r = confidence_ensemble(&anns, &schema).unwrap();
        assert_eq!(r.chosen_label, "favor");
    }

    fn item(id: &str, gold: Option<&str>) -> AnnotationItem {
        AnnotationItem {
            item_id: id.into(),
            text: alloc::format!("text {id}"),
            gold_label: gold.map(Into::into),
        }
    }

    #[test]
    fn score_dataset_c_score_composes_per_item() {
        let schema = schema3();
        let items = vec![item("i1", Some("favor")), item("i2", Some("against")), item("i3", None)];
        let mut annotations = BTreeMap::new();
        for (id, chosen, gap) in [("i1", "A", 1.0), ("i2", "A", 2.0), ("i3", "B", 0.5)] {
            annotations.insert(
                id.to_string(),
                vec![ann("m1", id, chosen, &[("A", -0.5), ("B", -0.5 - gap), ("C", -9.0)])],
            );
        }
        // i3 chose B; fix its distribution so B is the argmax
        annotations.get_mut("i3").unwrap()[0].label_logprobs =
            dist(&[("B", -0.5), ("A", -1.0), ("C", -9.0)]);
        let out =
            score_dataset(&items, &annotations, Strategy::CScore, &schema, &ScoreOptions::default())
                .unwrap();
        assert_eq!(out.scored.len(), 3);
        assert!((out.scored[0].score - 1.0).abs() < 1e-12);
        assert_eq!(out.scored[0].correct, Some(true));
        assert_eq!(out.scored[1].correct, Some(false));
        assert_eq!(out.scored[2].correct, None);
    }

    #[test]
    fn score_dataset_strict_mode_reports_missing_self_reports() {
        let schema = schema3();
        let items = vec![item("i1", None), item("i2", None)];
        let mut annotations = BTreeMap::new();
        let mut a1 = ann("m1", "i1", "A", &[("A", -0.5), ("B", -2.0)]);
        a1.self_quant = Some(80);
        annotations.insert("i1".to_string(), vec![a1]);
        annotations.insert("i2".to_string(), vec![ann("m1", "i2", "A", &[("A", -0.5), ("B", -2.0)])]);
        let err = score_dataset(
            &items,
            &annotations,
            Strategy::Quantitative,
            &schema,
            &ScoreOptions::default(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            ScoreError::MissingSelfReport {
                strategy: Strategy::Quantitative,
                item_ids: vec!["i2".into()]
            }
        );

        let lenient = ScoreOptions {
            self_report_mode: SelfReportMode::Lenient,
            ..ScoreOptions::default()
        };
        let out =
            score_dataset(&items, &annotations, Strategy::Quantitative, &schema, &lenient).unwrap();
        assert_eq!(out.scored[1].score, 0.0);
        assert_eq!(out.flagged.len(), 1);
        assert_eq!(out.flagged[0].item_id, "i2");
    }

    #[test]
    fn score_dataset_reports_items_without_annotations() {
        let schema = schema3();
        let items = vec![item("i1", None), item("i2", None)];
        let mut annotations = BTreeMap::new();
        annotations.insert("i1".to_string(), vec![ann("m1", "i1", "A", &[("A", -0.5), ("B", -2.0)])]);
        let err = score_dataset(
            &items,
            &annotations,
            Strategy::CScore,
            &schema,
            &ScoreOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, ScoreError::MissingAnnotation { item_ids: vec!["i2".into()] });
    }

    #[test]
    fn score_dataset_ensemble_matches_per_item_oracle() {
        let schema = schema3();
        let items: Vec<_> = (0..5).map(|i| item(&alloc::format!("i{i}"), Some("favor"))).collect();
        let mut annotations: BTreeMap<String, Vec<ModelAnnotation>> = BTreeMap::new();
        for (i, it) in items.iter().enumerate() {
            let gaps = [0.5 + i as f64, 1.0, 0.25 * i as f64 + 0.1];
            let tokens = ["A", "B", "A"];
            let anns: Vec<_> = (0..3)
                .map(|m| {
                    let t = tokens[m];
                    let other = if t == "A" { "B" } else { "A" };
                    ann(
                        &alloc::format!("m{m}"),
                        &it.item_id,
                        t,
                        &[(t, -0.2), (other, -0.2 - gaps[m]), ("C", -12.0)],
                    )
                })
                .collect();
            annotations.insert(it.item_id.clone(), anns);
        }
        let out = score_dataset(
            &items,
            &annotations,
            Strategy::CEnsemble,
            &schema,
            &ScoreOptions::default(),
        )
        .unwrap();
        for scored in &out.scored {
            let expected = confidence_ensemble(&annotations[&scored.item_id], &schema).unwrap();
            assert_eq!(scored.predicted_label, expected.chosen_label);
            assert!((scored.score - expected.c_agg).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn confidence_score_shift_invariant(
            lps in proptest::collection::vec(-20.0f64..0.0, 2..6),
            shift in -5.0f64..0.0,
        ) {
            let tokens = ["A", "B", "C", "D", "E", "F"];
            let d: TokenLogProbs = TokenLogProbs::new(
                lps.iter().enumerate().map(|(i, lp)| (tokens[i].to_string(), *lp)).collect());
            let shifted = TokenLogProbs::new(
                d.entries.iter().map(|(t, lp)| (t.clone(), lp + shift)).collect());
            let a = confidence_score(&d).unwrap();
            let b = confidence_score(&shifted).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn log_inverse_monotone_in_logprob(a in -50.0f64..0.0, b in -50.0f64..0.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let plo = log_inverse(lo).unwrap();
            let phi = log_inverse(hi).unwrap();
            prop_assert!(plo <= phi);
            prop_assert!(phi > 0.0 && phi <= 1.0);
        }

        #[test]
        fn ensemble_permutation_invariant(seed in 0u64..1000) {
            let schema = schema3();
            // three models with deterministic but varied predictions
            let tokens = ["A", "B", "C"];
            let anns: Vec<_> = (0..3).map(|m| {
                let t = tokens[((seed as usize) + m) % 3];
                let gap = 0.5 + ((seed % 7) as f64) * 0.25 + m as f64 * 0.125;
                let others: Vec<_> = tokens.iter().filter(|x| **x != t).collect();
                ann(&alloc::format!("m{m}"), "i", t,
                    &[(t, -0.2), (others[0], -0.2 - gap), (others[1], -0.2 - 2.0 * gap)])
            }).collect();
            let base = confidence_ensemble(&anns, &schema).unwrap();
            let mut rev = anns.clone();
            rev.reverse();
            let permuted = confidence_ensemble(&rev, &schema).unwrap();
            prop_assert_eq!(base.chosen_label, permuted.chosen_label);
            prop_assert!((base.c_agg - permuted.c_agg).abs() < 1e-12);
        }

        #[test]
        fn ensemble_all_agree_sums_individual_scores(gaps in proptest::collection::vec(0.0f64..5.0, 1..4)) {
            let schema = schema3();
            let anns: Vec<_> = gaps.iter().enumerate().map(|(m, gap)| {
                ann(&alloc::format!("m{m}"), "i", "A",
                    &[("A", -0.2), ("B", -0.2 - gap), ("C", -0.2 - gap - 1.0)])
            }).collect();
            let r = confidence_ensemble(&anns, &schema).unwrap();
            prop_assert_eq!(r.chosen_label.as_str(), "favor");
            let expected: f64 = anns.iter()
                .map(|a| confidence_score(&a.label_logprobs).unwrap())
                .sum();
            prop_assert!((r.c_agg - expected).abs() < 1e-9);
        }
    }

    // keep floor interplay honest: a floored distribution still scores
    #[test]
    fn confidence_score_with_floored_token() {
        let schema = schema3();
        let mut d = dist(&[("A", -0.1)]);
        d.floor_complete(&schema, DEFAULT_FLOOR_LOGPROB);
        let c = confidence_score(&d).unwrap();
        assert!((c - 99.9).abs() < 1e-9);
    }
}
