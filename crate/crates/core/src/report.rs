//! Report emission: JSON documents, flat CSV tables and a text grid.

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;
use crate::dataset::AuditMode;
use crate::measures::Measure;
use crate::sensitivity::{SensitivityNorm, SweepError, SweepResult};

pub const REPORT_CSV_HEADER: [&str; 8] =
    ["mode", "target", "measure", "applicable", "group_value", "baseline_value", "disparity", "unfair"];

/// Two-decimal rendering; `-0.00` is normalised to `0.00`.
pub fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt2).unwrap_or_default()
}

pub fn report_json(report: &AuditReport) -> serde_json::Result<String> {
    serde_json::to_string_pretty(report)
}

/// One row per (target, measure) record.
pub fn report_csv(report: &AuditReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_CSV_HEADER)?;
    for r in &report.records {
        w.write_record([
            match r.mode {
                AuditMode::Single => "single",
                AuditMode::Pairwise => "pairwise",
            }
            .to_string(),
            r.target.clone(),
            r.measure.id().to_string(),
            r.applicable.to_string(),
            fmt_opt(r.group_value),
            fmt_opt(r.baseline_value),
            fmt_opt(r.disparity),
            r.unfair.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Text grid with measures as rows and targets as columns.
///
/// `X` marks an unfair cell, `.` a fair one and `-` a cell that is
/// inapplicable or whose disparity is undefined.
pub fn render_grid(report: &AuditReport) -> String {
    let labels: Vec<&str> = report.targets.iter().map(|t| t.label.as_str()).collect();
    let first = report.measures.iter().map(|m| m.id().len()).max().unwrap_or(0).max(7);
    let widths: Vec<usize> = labels.iter().map(|l| l.chars().count().max(1)).collect();

    let mut out = format!("{:<first$}", "measure");
    for (l, w) in labels.iter().zip(&widths) {
        out.push_str(&format!(" {l:>w$}"));
    }
    out.push('\n');
    for &m in &report.measures {
        out.push_str(&format!("{:<first$}", m.id()));
        for (i, w) in widths.iter().enumerate() {
            let cell = match report.record(i, m) {
                Some(r) if r.unfair => "X",
                Some(r) if r.applicable && r.disparity.is_some() => ".",
                _ => "-",
            };
            out.push_str(&format!(" {cell:>w$}"));
        }
        out.push('\n');
    }
    let flagged = report.discriminated_labels();
    if flagged.is_empty() {
        out.push_str("no discriminated groups\n");
    } else {
        out.push_str(&format!("discriminated: {}\n", flagged.join(", ")));
    }
    for n in &report.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    out
}

/// Serialisable summary of a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub label: String,
    pub measure: Measure,
    pub norm: SensitivityNorm,
    pub thresholds: Vec<f64>,
    pub unfair_counts: Vec<usize>,
    pub overall_utility: Vec<Option<f64>>,
    /// Discriminated targets at each threshold.
    pub discriminated: Vec<Vec<String>>,
    pub sensitivity: f64,
}

impl SweepDocument {
    pub fn new(label: &str, result: &SweepResult, norm: SensitivityNorm) -> Result<Self, SweepError> {
        Ok(SweepDocument {
            label: label.to_string(),
            measure: result.measure,
            norm,
            thresholds: result.thresholds(),
            unfair_counts: result.unfair_counts(),
            overall_utility: result.points.iter().map(|p| p.overall_utility).collect(),
            discriminated: result
                .points
                .iter()
                .map(|p| p.report.discriminated_labels().into_iter().map(str::to_string).collect())
                .collect(),
            sensitivity: result.sensitivity(norm)?,
        })
    }
}

/// Heat-map table: one row per sweep, one column per threshold, cells
/// `count:utility`.
pub fn heatmap_csv(docs: &[SweepDocument]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let thresholds = docs.first().map(|d| d.thresholds.clone()).unwrap_or_default();
    let mut header = vec!["label".to_string()];
    header.extend(thresholds.iter().map(|t| fmt2(*t)));
    header.push("sensitivity".into());
    w.write_record(&header)?;
    for d in docs {
        let mut row = vec![d.label.clone()];
        row.extend(
            d.unfair_counts
                .iter()
                .zip(&d.overall_utility)
                .map(|(c, u)| format!("{c}:{}", u.map(fmt2).unwrap_or_else(|| "-".into()))),
        );
        row.push(format!("{:.4}", d.sensitivity));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{run_audit, single_targets, DisparityConfig};
    use crate::sensitivity::sweep;
    use crate::testutil::worked_example;

    #[test]
    fn two_decimals() {
        assert_eq!(fmt2(0.125), "0.12");
        assert_eq!(fmt2(-0.0001), "0.00");
        assert_eq!(fmt2(1.0), "1.00");
    }

    #[test]
    fn csv_and_grid_cover_every_record() {
        let (u, cs) = worked_example();
        let r = run_audit(&u, &cs, &single_targets(&u), &Measure::ALL, &DisparityConfig::default()).unwrap();
        let csv = report_csv(&r).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_CSV_HEADER.join(","));
        assert_eq!(lines.len(), 1 + r.records.len());
        assert!(lines[1].starts_with("single,g1,AP,"));

        let grid = render_grid(&r);
        assert_eq!(grid.lines().count(), 1 + Measure::ALL.len() + 1 + r.notes.len());
        assert!(grid.lines().next().unwrap().contains("g1"));
        let json: serde_json::Value = serde_json::from_str(&report_json(&r).unwrap()).unwrap();
        assert_eq!(json["records"].as_array().unwrap().len(), r.records.len());
    }

    #[test]
    fn heatmap_layout() {
        let (u, mut cs) = worked_example();
        for (c, s) in cs.iter_mut().zip([0.9, 0.1, 0.6, 0.4]) {
            c.score = Some(s);
        }
        let res =
            sweep(&u, &cs, &[0.3, 0.5, 0.7], &single_targets(&u), Measure::TPRP, &DisparityConfig::default()).unwrap();
        let doc = SweepDocument::new("m", &res, SensitivityNorm::L2).unwrap();
        let csv = heatmap_csv(std::slice::from_ref(&doc)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "label,0.30,0.50,0.70,sensitivity");
        let row = lines.next().unwrap();
        assert!(row.starts_with("m,"));
        assert_eq!(row.split(',').count(), 5);
        assert!(row.split(',').nth(1).unwrap().contains(':'));
        let back: SweepDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back, doc);
    }
}
