//! Ranking scored items and selecting the bottom slice for human review.

use alloc::vec::Vec;
use core::fmt;

use crate::model::ScoredItem;

#[derive(Debug, Clone, PartialEq)]
pub enum TriageError {
    MixedStrategies,
    /// Fraction outside (0, 1].
    DomainError { value: f64 },
}

impl fmt::Display for TriageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriageError::MixedStrategies => write!(f, "scored items mix strategies"),
            TriageError::DomainError { value } => {
                write!(f, "fraction {value} outside (0, 1]")
            }
        }
    }
}

/// Sorts ascending by score, least confident first. Ties break by item id
/// so the display order is deterministic; evaluation handles ties by
/// mid-rank internally and is unaffected by this order.
pub fn rank_items(scored: &[ScoredItem]) -> Result<Vec<ScoredItem>, TriageError> {
    if let Some(first) = scored.first() {
        if scored.iter().any(|s| s.strategy != first.strategy) {
            return Err(TriageError::MixedStrategies);
        }
    }
    let mut ranked = scored.to_vec();
    ranked.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.item_id.cmp(&b.item_id)));
    Ok(ranked)
}

/// First ceil(p * N) items of a ranked list: the least confident slice.
/// ceil so any positive fraction selects at least one item.
pub fn select_bottom(ranked: &[ScoredItem], fraction: f64) -> Result<&[ScoredItem], TriageError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(TriageError::DomainError { value: fraction });
    }
    let n = ranked.len();
    // nudge below the product so ceil is immune to float round-up
    let count = (libm::ceil(fraction * n as f64 - 1e-9) as usize).min(n);
    Ok(&ranked[..count])
}
