//! Writers for curve data, summary tables, and triage lists.

use std::io::Write;
use std::path::Path;

use thiserror::Error;
use uq_core::model::EvalCurve;
use uq_core::report::{curve_to_csv, SummaryTable};

use crate::formats::TriageRecord;

#[derive(Debug, Error)]
pub enum ReportIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn io_err(path: &Path, source: std::io::Error) -> ReportIoError {
    ReportIoError::Io { path: path.display().to_string(), source }
}

/// Writes a curve as delimiter-separated x,y pairs with an AUC header.
/// Identical curves produce byte-identical files.
pub fn export_curve(curve: &EvalCurve, path: &Path) -> Result<(), ReportIoError> {
    std::fs::write(path, curve_to_csv(curve)).map_err(|e| io_err(path, e))
}

/// Writes both renderings of a summary table into a directory:
/// `summary.txt` (human) and `summary.csv` (machine).
pub fn write_summary(table: &SummaryTable, dir: &Path) -> Result<(), ReportIoError> {
    let text_path = dir.join("summary.txt");
    std::fs::write(&text_path, table.to_text()).map_err(|e| io_err(&text_path, e))?;
    let csv_path = dir.join("summary.csv");
    std::fs::write(&csv_path, table.to_csv()).map_err(|e| io_err(&csv_path, e))
}

/// Writes a triage list as line-delimited JSON for human annotators.
pub fn write_triage(records: &[TriageRecord], path: &Path) -> Result<(), ReportIoError> {
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    for record in records {
        let line = serde_json::to_string(record).expect("triage record serializes");
        writeln!(file, "{line}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use uq_core::evaluation::{recall_curve, trapezoid_auc};
    use uq_core::model::{ScoredItem, Strategy};
    use uq_core::report::curve_from_csv;

    fn curve() -> EvalCurve {
        let items: Vec<ScoredItem> = (0..4)
            .map(|i| ScoredItem {
                item_id: format!("i{i}"),
                strategy: Strategy::CScore,
                score: i as f64,
                predicted_label: "favor".into(),
                correct: Some(i >= 2),
            })
            .collect();
        recall_curve(&items).unwrap()
    }

    #[test]
    fn curve_export_is_deterministic_and_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let c = curve();
        export_curve(&c, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        export_curve(&c, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);

        let text = String::from_utf8(first).unwrap();
        // N+1 data rows after the two header lines
        assert_eq!(text.lines().count(), 2 + c.n_items + 1);
        let (auc, points) = curve_from_csv(&text).unwrap();
        assert!((auc - c.auc).abs() < 1e-6);
        assert!((trapezoid_auc(&points) - c.auc).abs() < 1e-9);
    }

    #[test]
    fn triage_file_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triage.jsonl");
        let records = vec![TriageRecord {
            rank: 1,
            item_id: "i0".into(),
            score: 0.25,
            predicted_label: "favor".into(),
            strategy: Strategy::CScore,
            model_id: "m".into(),
            text: "hello".into(),
        }];
        write_triage(&records, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("\"predicted_label\":\"favor\""));
    }
}
