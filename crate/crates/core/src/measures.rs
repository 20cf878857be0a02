//! The eleven group-fairness measures and when each one is meaningful.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::confusion::{exact_rates, prob_to_f64, ConfusionMatrix, Prob};
use crate::dataset::AuditMode;

/// Which way a probability is "better" for the audited group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
    /// No preferred side: disparity is an absolute deviation.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    /// Accuracy parity.
    AP,
    /// Statistical parity (equal positive-prediction ratios).
    SP,
    /// True positive rate parity (equal opportunity).
    TPRP,
    FPRP,
    FNRP,
    TNRP,
    /// Equalized odds: TPRP and FPRP together.
    EO,
    /// Positive predictive value parity.
    PPVP,
    NPVP,
    FDRP,
    FORP,
}

impl Measure {
    pub const ALL: [Measure; 11] = [
        Measure::AP,
        Measure::SP,
        Measure::TPRP,
        Measure::FPRP,
        Measure::FNRP,
        Measure::TNRP,
        Measure::EO,
        Measure::PPVP,
        Measure::NPVP,
        Measure::FDRP,
        Measure::FORP,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Measure::AP => "AP",
            Measure::SP => "SP",
            Measure::TPRP => "TPRP",
            Measure::FPRP => "FPRP",
            Measure::FNRP => "FNRP",
            Measure::TNRP => "TNRP",
            Measure::EO => "EO",
            Measure::PPVP => "PPVP",
            Measure::NPVP => "NPVP",
            Measure::FDRP => "FDRP",
            Measure::FORP => "FORP",
        }
    }

    /// `None` for EO, which is judged through its TPRP and FPRP components.
    pub fn direction(self) -> Option<Direction> {
        use Direction::*;
        match self {
            Measure::AP | Measure::TPRP | Measure::TNRP | Measure::PPVP | Measure::NPVP => Some(HigherBetter),
            Measure::FPRP | Measure::FNRP | Measure::FDRP | Measure::FORP => Some(LowerBetter),
            Measure::SP => Some(Symmetric),
            Measure::EO => None,
        }
    }

    /// Measures that condition on a true match or on a predicted match among
    /// true matches, and so are void for a pair of disjoint groups that never
    /// truly match each other.
    pub fn single_only(self) -> bool {
        matches!(
            self,
            Measure::TPRP | Measure::FNRP | Measure::EO | Measure::PPVP | Measure::NPVP | Measure::FDRP | Measure::FORP
        )
    }

    pub fn components(self) -> Option<[Measure; 2]> {
        (self == Measure::EO).then_some([Measure::TPRP, Measure::FPRP])
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Measure::ALL
            .into_iter()
            .find(|m| m.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

/// Value of a measure on one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureValue<T> {
    Scalar(Option<T>),
    /// EO: (true positive rate, false positive rate).
    Pair(Option<T>, Option<T>),
}

/// Exact value of a scalar measure, `None` when undefined.
pub fn scalar_exact(measure: Measure, m: &ConfusionMatrix) -> Option<Prob> {
    let r = exact_rates(m);
    match measure {
        Measure::AP => r.accuracy,
        Measure::SP => r.positive_rate,
        Measure::TPRP => r.tpr,
        Measure::FPRP => r.fpr,
        Measure::FNRP => r.fnr,
        Measure::TNRP => r.tnr,
        Measure::PPVP => r.ppv,
        Measure::NPVP => r.npv,
        Measure::FDRP => r.fdr,
        Measure::FORP => r.forr,
        Measure::EO => None,
    }
}

pub fn measure_value_exact(measure: Measure, m: &ConfusionMatrix) -> MeasureValue<Prob> {
    match measure {
        Measure::EO => MeasureValue::Pair(scalar_exact(Measure::TPRP, m), scalar_exact(Measure::FPRP, m)),
        other => MeasureValue::Scalar(scalar_exact(other, m)),
    }
}

pub fn measure_value(measure: Measure, m: &ConfusionMatrix) -> MeasureValue<f64> {
    match measure_value_exact(measure, m) {
        MeasureValue::Scalar(v) => MeasureValue::Scalar(v.map(prob_to_f64)),
        MeasureValue::Pair(a, b) => MeasureValue::Pair(a.map(prob_to_f64), b.map(prob_to_f64)),
    }
}

/// Whether `measure` is meaningful for a target of the given mode.
/// `pair_overlapping` is ignored in single mode.
pub fn applicability(measure: Measure, mode: AuditMode, pair_overlapping: bool) -> bool {
    match mode {
        AuditMode::Single => true,
        AuditMode::Pairwise => !measure.single_only() || pair_overlapping,
    }
}
