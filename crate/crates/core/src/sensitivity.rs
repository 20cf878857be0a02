//! Matching-threshold sweeps and threshold sensitivity scores.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{run_audit, AuditError, AuditReport, DisparityConfig};
use crate::confusion::{prob_to_f64, ConfusionMatrix};
use crate::dataset::{AuditTarget, Correspondence};
use crate::groups::GroupUniverse;
use crate::matchers::score_match;
use crate::measures::{scalar_exact, Measure};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("correspondence {index} ({left}, {right}) has no score")]
    MissingScore { index: usize, left: String, right: String },
    #[error("thresholds must be strictly increasing and within [0, 1]")]
    InvalidThresholds,
    #[error("sensitivity needs at least two thresholds, got {0}")]
    TooFewThresholds(usize),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityNorm {
    /// Square root of the summed squared adjacent differences.
    #[default]
    L2,
    /// Mean absolute adjacent difference.
    MeanAbs,
}

/// `{0.30, 0.35, ..., 0.90}`.
pub fn default_thresholds() -> Vec<f64> {
    (30..=90).step_by(5).map(|p| p as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub unfair_count: usize,
    /// The measure's rate on the whole population (TPR for EO).
    pub overall_utility: Option<f64>,
    pub report: AuditReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub measure: Measure,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn thresholds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.threshold).collect()
    }

    pub fn unfair_counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.unfair_count).collect()
    }

    pub fn sensitivity(&self, norm: SensitivityNorm) -> Result<f64, SweepError> {
        sensitivity(&self.unfair_counts(), norm)
    }

    /// Whether every target's TP and FP counts are non-increasing as the
    /// threshold rises.
    pub fn counts_monotone(&self) -> bool {
        self.points.windows(2).all(|w| {
            w[0].report
                .targets
                .iter()
                .zip(&w[1].report.targets)
                .all(|(a, b)| b.matrix.tp <= a.matrix.tp && b.matrix.fp <= a.matrix.fp)
        })
    }
}

fn utility(measure: Measure, m: &ConfusionMatrix) -> Option<f64> {
    let m_for = if measure == Measure::EO { Measure::TPRP } else { measure };
    scalar_exact(m_for, m).map(prob_to_f64)
}

/// Re-decides every pair at each threshold and audits the result.
pub fn sweep(
    universe: &GroupUniverse,
    cs: &[Correspondence],
    thresholds: &[f64],
    targets: &[AuditTarget],
    measure: Measure,
    cfg: &DisparityConfig,
) -> Result<SweepResult, SweepError> {
    if thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SweepError::InvalidThresholds);
    }
    let scores: Vec<f64> = cs
        .iter()
        .enumerate()
        .map(|(index, c)| {
            c.score.ok_or_else(|| SweepError::MissingScore {
                index,
                left: c.id_left.clone(),
                right: c.id_right.clone(),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut work = cs.to_vec();
    let mut points = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        for (c, &s) in work.iter_mut().zip(&scores) {
            c.decision = Some(score_match(s, t));
        }
        let report = run_audit(universe, &work, targets, &[measure], cfg)?;
        points.push(SweepPoint {
            threshold: t,
            unfair_count: report.unfair_count(measure),
            overall_utility: utility(measure, &report.overall_matrix),
            report,
        });
    }
    Ok(SweepResult { measure, points })
}

/// Sensitivity of the unfair-group counts to adjacent threshold changes.
pub fn sensitivity(counts: &[usize], norm: SensitivityNorm) -> Result<f64, SweepError> {
    if counts.len() < 2 {
        return Err(SweepError::TooFewThresholds(counts.len()));
    }
    let diffs = counts.windows(2).map(|w| w[1] as f64 - w[0] as f64);
    Ok(match norm {
        SensitivityNorm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        SensitivityNorm::MeanAbs => diffs.map(f64::abs).sum::<f64>() / (counts.len() - 1) as f64,
    })
}

pub fn sensitivity_l2(counts: &[usize]) -> Result<f64, SweepError> {
    sensitivity(counts, SensitivityNorm::L2)
}
