//! Recall-of-misclassified curve, its AUC, and labeling accuracy.
//!
//! Items are ranked ascending by confidence; the curve tracks how many of
//! the wrongly labeled items fall within the bottom-x fraction. Tied
//! scores get mid-rank treatment: a tie group's wrong count is spread
//! uniformly over its positions, which makes the curve deterministic and
//! permutation-invariant.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{EvalCurve, ScoredItem};

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    EmptyInput,
    /// Recall is undefined when no item is wrong.
    NoWrongItems,
    MixedStrategies,
    /// An item lacks the correctness flag (no gold label).
    MissingCorrectness { item_id: String },
    /// Fraction outside [0, 1].
    DomainError { value: f64 },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyInput => write!(f, "no scored items"),
            EvalError::NoWrongItems => write!(f, "every item is correct; recall is undefined"),
            EvalError::MixedStrategies => write!(f, "scored items mix strategies"),
            EvalError::MissingCorrectness { item_id } => {
                write!(f, "item {item_id:?} has no correctness flag")
            }
            EvalError::DomainError { value } => write!(f, "fraction {value} outside [0, 1]"),
        }
    }
}

/// Builds the recall curve for one strategy's scored items. Points run
/// from (0, 0) to (1, 1) at every item boundary x = k/N.
pub fn recall_curve(scored: &[ScoredItem]) -> Result<EvalCurve, EvalError> {
    if scored.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let strategy = scored[0].strategy;
    let mut wrong_flags: Vec<(f64, bool)> = Vec::with_capacity(scored.len());
    for item in scored {
        if item.strategy != strategy {
            return Err(EvalError::MixedStrategies);
        }
        let correct = item
            .correct
            .ok_or_else(|| EvalError::MissingCorrectness { item_id: item.item_id.clone() })?;
        wrong_flags.push((item.score, !correct));
    }
    let n = wrong_flags.len();
    let total_wrong = wrong_flags.iter().filter(|(_, w)| *w).count();
    if total_wrong == 0 {
        return Err(EvalError::NoWrongItems);
    }
    wrong_flags.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, 0.0));
    let mut cumulative = 0.0f64;
    let mut k = 0usize;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && wrong_flags[end].0.total_cmp(&wrong_flags[start].0).is_eq() {
            end += 1;
        }
        let group = end - start;
        let wrong_in_group = wrong_flags[start..end].iter().filter(|(_, w)| *w).count();
        // each position in the tie group recalls wrong/group in expectation
        let per_step = wrong_in_group as f64 / group as f64;
        for _ in 0..group {
            cumulative += per_step;
            k += 1;
            let x = k as f64 / n as f64;
            let y = if k == n { 1.0 } else { cumulative / total_wrong as f64 };
            points.push((x, y.min(1.0)));
        }
        start = end;
    }
    let auc = trapezoid_auc(&points);
    Ok(EvalCurve { points, auc, n_items: n, n_wrong: total_wrong })
}

/// Trapezoidal integral of a piecewise-linear curve over its points.
pub fn trapezoid_auc(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Recomputes the curve's AUC from its points.
pub fn auc(curve: &EvalCurve) -> f64 {
    trapezoid_auc(&curve.points)
}

/// Fraction of items the model labeled correctly.
pub fn accuracy(scored: &[ScoredItem]) -> Result<f64, EvalError> {
    if scored.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut correct = 0usize;
    for item in scored {
        match item.correct {
            Some(true) => correct += 1,
            Some(false) => {}
            None => {
                return Err(EvalError::MissingCorrectness { item_id: item.item_id.clone() })
            }
        }
    }
    Ok(correct as f64 / scored.len() as f64)
}

/// Linear interpolation of the curve at a given evaluated fraction.
pub fn recall_at(curve: &EvalCurve, fraction: f64) -> Result<f64, EvalError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(EvalError::DomainError { value: fraction });
    }
    let points = &curve.points;
    if fraction <= points[0].0 {
        return Ok(points[0].1);
    }
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if fraction <= x1 {
            if x1 == x0 {
                return Ok(y1);
            }
            return Ok(y0 + (y1 - y0) * (fraction - x0) / (x1 - x0));
        }
    }
    Ok(points.last().map(|p| p.1).unwrap_or(1.0))
}
