//! Outcome classification and per-group confusion matrices.
//!
//! Entity matching differs from plain classification in that a pair has two
//! entities: in single-fairness mode a pair whose both sides belong to the
//! audited group is counted twice, once per side. Pairwise mode counts each
//! legitimate pair once.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{legitimate_pairwise, legitimate_single, Correspondence, Label};
use crate::groups::{GroupEncoding, GroupError};

/// Exact probability, used until values leave the engine.
pub type Prob = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfusionError {
    #[error("correspondence {index} ({left}, {right}) has no matcher decision")]
    MissingDecision { index: usize, left: String, right: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    TP,
    FP,
    FN,
    TN,
}

pub fn classify(decision: Option<Label>, truth: Label) -> Option<Outcome> {
    Some(match (decision?, truth) {
        (Label::Match, Label::Match) => Outcome::TP,
        (Label::Match, Label::NonMatch) => Outcome::FP,
        (Label::NonMatch, Label::Match) => Outcome::FN,
        (Label::NonMatch, Label::NonMatch) => Outcome::TN,
    })
}

fn outcome_at(cs: &[Correspondence], index: usize) -> Result<Outcome, ConfusionError> {
    let c = &cs[index];
    classify(c.decision, c.truth).ok_or_else(|| ConfusionError::MissingDecision {
        index,
        left: c.id_left.clone(),
        right: c.id_right.clone(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn add(&mut self, outcome: Outcome, weight: u64) {
        match outcome {
            Outcome::TP => self.tp += weight,
            Outcome::FP => self.fp += weight,
            Outcome::FN => self.fn_ += weight,
            Outcome::TN => self.tn += weight,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

/// Accumulates with a per-correspondence weight (0 skips the row).
fn accumulate_weighted<F>(cs: &[Correspondence], mut weight: F) -> Result<ConfusionMatrix, ConfusionError>
where
    F: FnMut(&Correspondence) -> Result<u64, ConfusionError>,
{
    let mut m = ConfusionMatrix::default();
    for (i, c) in cs.iter().enumerate() {
        let w = weight(c)?;
        if w > 0 {
            m.add(outcome_at(cs, i)?, w);
        }
    }
    Ok(m)
}

/// Single-fairness matrix of `g`: +2 when both sides belong to `g`, +1 when
/// one side does.
pub fn accumulate_single(cs: &[Correspondence], g: &GroupEncoding) -> Result<ConfusionMatrix, ConfusionError> {
    accumulate_weighted(cs, |c| {
        if !legitimate_single(c, g)? {
            return Ok(0);
        }
        Ok(u64::from(g.is_subset_of(&c.groups_left)) + u64::from(g.is_subset_of(&c.groups_right)))
    })
}

/// Matrix of the sides that do *not* belong to `g`, with the same per-side
/// weighting as [`accumulate_single`]. For an exclusive attribute this is the
/// single-fairness matrix of the union of `g`'s sibling values.
pub fn accumulate_single_complement(
    cs: &[Correspondence],
    g: &GroupEncoding,
) -> Result<ConfusionMatrix, ConfusionError> {
    accumulate_weighted(cs, |c| Ok(u64::from(!g.contains(&c.groups_left)?) + u64::from(!g.contains(&c.groups_right)?)))
}

/// Pairwise matrix of `(s, s')`: +1 per legitimate pair.
pub fn accumulate_pairwise(
    cs: &[Correspondence],
    pair: (&GroupEncoding, &GroupEncoding),
) -> Result<ConfusionMatrix, ConfusionError> {
    accumulate_weighted(cs, |c| Ok(u64::from(legitimate_pairwise(c, pair)?)))
}

/// +1 per pair that is not legitimate for `(s, s')`.
pub fn accumulate_pairwise_complement(
    cs: &[Correspondence],
    pair: (&GroupEncoding, &GroupEncoding),
) -> Result<ConfusionMatrix, ConfusionError> {
    accumulate_weighted(cs, |c| Ok(u64::from(!legitimate_pairwise(c, pair)?)))
}

/// Unconditioned matrix: one increment per correspondence.
pub fn overall_matrix(cs: &[Correspondence]) -> Result<ConfusionMatrix, ConfusionError> {
    accumulate_weighted(cs, |_| Ok(1))
}

fn frac(num: u64, den: u64) -> Option<Prob> {
    (den > 0).then(|| Ratio::new(num as i64, den as i64))
}

/// Rates as exact fractions; `None` when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExactRates {
    pub tpr: Option<Prob>,
    pub fpr: Option<Prob>,
    pub fnr: Option<Prob>,
    pub tnr: Option<Prob>,
    pub ppv: Option<Prob>,
    pub npv: Option<Prob>,
    pub fdr: Option<Prob>,
    pub forr: Option<Prob>,
    pub accuracy: Option<Prob>,
    pub positive_rate: Option<Prob>,
    pub f1: Option<Prob>,
}

pub fn exact_rates(m: &ConfusionMatrix) -> ExactRates {
    let ConfusionMatrix { tp, fp, fn_, tn } = *m;
    let total = m.total();
    ExactRates {
        tpr: frac(tp, tp + fn_),
        fnr: frac(fn_, tp + fn_),
        fpr: frac(fp, fp + tn),
        tnr: frac(tn, fp + tn),
        ppv: frac(tp, tp + fp),
        fdr: frac(fp, tp + fp),
        npv: frac(tn, tn + fn_),
        forr: frac(fn_, tn + fn_),
        accuracy: frac(tp + tn, total),
        positive_rate: frac(tp + fp, total),
        f1: frac(2 * tp, 2 * tp + fp + fn_),
    }
}

pub fn prob_to_f64(p: Prob) -> f64 {
    p.to_f64().expect("ratio of small integers is finite")
}

/// Correctness and parity rates of one confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateSet {
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub tnr: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub fdr: Option<f64>,
    #[serde(rename = "for")]
    pub forr: Option<f64>,
    pub accuracy: Option<f64>,
    pub positive_rate: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn rates(m: &ConfusionMatrix) -> RateSet {
    let e = exact_rates(m);
    let f = |p: Option<Prob>| p.map(prob_to_f64);
    RateSet {
        tpr: f(e.tpr),
        fpr: f(e.fpr),
        fnr: f(e.fnr),
        tnr: f(e.tnr),
        ppv: f(e.ppv),
        npv: f(e.npv),
        fdr: f(e.fdr),
        forr: f(e.forr),
        accuracy: f(e.accuracy),
        positive_rate: f(e.positive_rate),
        precision: f(e.ppv),
        recall: f(e.tpr),
        f1: f(e.f1),
    }
}
