//! Summary-table construction and deterministic text renderings of
//! evaluation results and curves.
//!
//! AUC values are stored in [0, 1] and displayed scaled to 0-100 with one
//! decimal. Rendering is pure string building; file writes live in the
//! toolkit crate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::model::{EvalCurve, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub enum ReportError {
    EmptyInput,
    DuplicateEntry { strategy: Strategy, model: String, dataset: String },
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::EmptyInput => write!(f, "no summary rows"),
            ReportError::DuplicateEntry { strategy, model, dataset } => {
                write!(f, "duplicate summary entry for ({strategy}, {model}, {dataset})")
            }
        }
    }
}

/// One evaluated (strategy, model, dataset) result.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub strategy: Strategy,
    pub model: String,
    pub dataset: String,
    /// AUC in [0, 1].
    pub auc: f64,
    /// Labeling accuracy in [0, 1], when gold labels allowed computing it.
    pub accuracy: Option<f64>,
}

/// Strategies as rows, (model, dataset) pairs as columns, a per-strategy
/// average column, and the best strategy per column marked.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<SummaryRow>,
    /// Accuracy per column, where available.
    pub accuracy: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    /// One cell per column; `None` when the combination was not evaluated.
    pub cells: Vec<Option<SummaryCell>>,
    /// Mean AUC over the present cells.
    pub average: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryCell {
    pub auc: f64,
    /// Highest AUC in its column.
    pub best: bool,
}

/// Displayed form of an AUC value: scaled to 0-100, one decimal.
pub fn format_auc(auc: f64) -> String {
    format!("{:.1}", auc * 100.0)
}

pub fn render_summary(entries: &[SummaryEntry]) -> Result<SummaryTable, ReportError> {
    if entries.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut columns: Vec<(String, String)> = Vec::new();
    for e in entries {
        let key = (e.model.clone(), e.dataset.clone());
        if !columns.contains(&key) {
            columns.push(key);
        }
    }
    let mut strategies: Vec<Strategy> = Vec::new();
    for s in Strategy::ALL {
        if entries.iter().any(|e| e.strategy == s) {
            strategies.push(s);
        }
    }
    let mut by_key: BTreeMap<(Strategy, &str, &str), f64> = BTreeMap::new();
    let mut accuracy_by_col: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for e in entries {
        let key = (e.strategy, e.model.as_str(), e.dataset.as_str());
        if by_key.insert(key, e.auc).is_some() {
            return Err(ReportError::DuplicateEntry {
                strategy: e.strategy,
                model: e.model.clone(),
                dataset: e.dataset.clone(),
            });
        }
        if let Some(acc) = e.accuracy {
            accuracy_by_col.entry((e.model.as_str(), e.dataset.as_str())).or_insert(acc);
        }
    }
    let mut rows: Vec<SummaryRow> = strategies
        .iter()
        .map(|&strategy| {
            let cells: Vec<Option<SummaryCell>> = columns
                .iter()
                .map(|(m, d)| {
                    by_key
                        .get(&(strategy, m.as_str(), d.as_str()))
                        .map(|&auc| SummaryCell { auc, best: false })
                })
                .collect();
            let present: Vec<f64> = cells.iter().flatten().map(|c| c.auc).collect();
            let average = present.iter().sum::<f64>() / present.len().max(1) as f64;
            SummaryRow { strategy, cells, average }
        })
        .collect();
    for col in 0..columns.len() {
        let best = rows
            .iter()
            .filter_map(|r| r.cells[col].map(|c| c.auc))
            .fold(f64::NEG_INFINITY, f64::max);
        for row in &mut rows {
            if let Some(cell) = &mut row.cells[col] {
                cell.best = cell.auc == best;
            }
        }
    }
    let accuracy = columns
        .iter()
        .map(|(m, d)| accuracy_by_col.get(&(m.as_str(), d.as_str())).copied())
        .collect();
    Ok(SummaryTable { columns, rows, accuracy })
}

impl SummaryTable {
    fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|(m, d)| format!("{m}:{d}")).collect()
    }

    /// Aligned plain-text table; the best AUC per column carries a `*`.
    pub fn to_text(&self) -> String {
        let names = self.column_names();
        let mut grid: Vec<Vec<String>> = Vec::new();
        let mut header: Vec<String> = Vec::with_capacity(names.len() + 2);
        header.push("strategy".to_string());
        header.extend(names);
        header.push("avg".to_string());
        grid.push(header);
        for row in &self.rows {
            let mut line = Vec::with_capacity(self.columns.len() + 2);
            line.push(row.strategy.to_string());
            for cell in &row.cells {
                line.push(match cell {
                    Some(c) if c.best => format!("{}*", format_auc(c.auc)),
                    Some(c) => format_auc(c.auc),
                    None => "-".to_string(),
                });
            }
            line.push(format_auc(row.average));
            grid.push(line);
        }
        if self.accuracy.iter().any(Option::is_some) {
            let mut line = Vec::with_capacity(self.columns.len() + 2);
            line.push("accuracy".to_string());
            for acc in &self.accuracy {
                line.push(match acc {
                    Some(a) => format_auc(*a),
                    None => "-".to_string(),
                });
            }
            line.push("-".to_string());
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|row| row[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &grid {
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                let _ = write!(out, "{cell:>width$}", width = widths[c]);
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable long form: one line per cell, plus average and
    /// accuracy lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,model,dataset,auc,auc_pct,best\n");
        for row in &self.rows {
            for (col, cell) in row.cells.iter().enumerate() {
                if let Some(c) = cell {
                    let (m, d) = &self.columns[col];
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        row.strategy,
                        m,
                        d,
                        c.auc,
                        format_auc(c.auc),
                        c.best
                    );
                }
            }
            let _ = writeln!(
                out,
                "{},-,avg,{},{},false",
                row.strategy,
                row.average,
                format_auc(row.average)
            );
        }
        for (col, acc) in self.accuracy.iter().enumerate() {
            if let Some(a) = acc {
                let (m, d) = &self.columns[col];
                let _ = writeln!(out, "accuracy,{},{},{},{},false", m, d, a, format_auc(*a));
            }
        }
        out
    }
}

/// Delimiter-separated rendering of a curve: a header comment with the
/// AUC (six decimals), item and wrong counts, then one x,y row per point.
/// Byte-deterministic for identical curves.
pub fn curve_to_csv(curve: &EvalCurve) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# auc={:.6} n_items={} n_wrong={}",
        curve.auc, curve.n_items, curve.n_wrong
    );
    out.push_str("x,y\n");
    for (x, y) in &curve.points {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

/// Parses a curve file back; used to cross-check exports.
pub fn curve_from_csv(text: &str) -> Option<(f64, Vec<(f64, f64)>)> {
    let mut lines = text.lines();
    let header = lines.next()?;
    let auc_field = header.split_whitespace().find(|f| f.starts_with("auc="))?;
    let auc: f64 = auc_field.trim_start_matches("auc=").parse().ok()?;
    let columns = lines.next()?;
    if columns != "x,y" {
        return None;
    }
    let mut points = Vec::new();
    for line in lines {
        let (x, y) = line.split_once(',')?;
        points.push((x.parse().ok()?, y.parse().ok()?));
    }
    Some((auc, points))
}
