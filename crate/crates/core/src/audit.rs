//! Disparity arithmetic and the audit driver.
//!
//! Two conventions are supported:
//!
//! * `Equation`: clamped disparity of a group against a baseline, where a
//!   group doing better than the baseline scores 0. Subtraction gives
//!   `max(0, base - group)` and division `max(0, 1 - group / base)` for
//!   higher-is-better measures; operands swap for lower-is-better ones.
//! * `Table`: the signed gap used in two-group result tables. Subtraction
//!   gives `other - protected` and division `other / protected - 1` for
//!   higher-is-better measures (operands swap otherwise). Negative values mean
//!   the audited group is advantaged.
//!
//! All arithmetic runs on exact fractions and is converted to `f64` once.

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::confusion::{
    accumulate_pairwise, accumulate_pairwise_complement, accumulate_single, accumulate_single_complement,
    overall_matrix, prob_to_f64, rates, ConfusionError, ConfusionMatrix, Prob, RateSet,
};
use crate::dataset::{legitimate_pairwise, AuditMode, AuditTarget, Correspondence};
use crate::groups::{GroupEncoding, GroupError, GroupUniverse};
use crate::measures::{applicability, scalar_exact, Direction, Measure};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error(transparent)]
    Confusion(#[from] ConfusionError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("complement baseline needs a single value of an exclusive attribute, got `{0}`")]
    ComplementUnsupported(String),
    #[error("fairness threshold must be a finite non-negative number, got {0}")]
    InvalidTau(f64),
    #[error("ratio is undefined: denominator is zero")]
    UndefinedRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisparityOp {
    Sub,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[serde(alias = "eq")]
    Equation,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Overall,
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisparityConfig {
    /// Fairness threshold; a disparity strictly above it is unfair.
    pub tau: f64,
    pub op: DisparityOp,
    pub convention: Convention,
    pub baseline: Baseline,
}

impl Default for DisparityConfig {
    fn default() -> Self {
        DisparityConfig {
            tau: 0.2,
            op: DisparityOp::Sub,
            convention: Convention::Equation,
            baseline: Baseline::Overall,
        }
    }
}

impl DisparityConfig {
    /// Signed two-group gaps against the complement group.
    pub fn table(op: DisparityOp, tau: f64) -> Self {
        DisparityConfig { tau, op, convention: Convention::Table, baseline: Baseline::Complement }
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(AuditError::InvalidTau(self.tau));
        }
        Ok(())
    }
}

fn clamp0<T: Signed + PartialOrd + Copy>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Clamped subtraction disparity of `group_p` against `baseline_p`.
pub fn disparity_sub<T: Signed + PartialOrd + Copy>(baseline_p: T, group_p: T, direction: Direction) -> T {
    match direction {
        Direction::HigherBetter => clamp0(baseline_p - group_p),
        Direction::LowerBetter => clamp0(group_p - baseline_p),
        Direction::Symmetric => (baseline_p - group_p).abs(),
    }
}

/// Clamped division disparity; `None` when the denominator is zero.
pub fn disparity_div<T: Signed + PartialOrd + Copy>(baseline_p: T, group_p: T, direction: Direction) -> Option<T> {
    match direction {
        Direction::HigherBetter => (!baseline_p.is_zero()).then(|| clamp0(T::one() - group_p / baseline_p)),
        Direction::LowerBetter => (!group_p.is_zero()).then(|| clamp0(T::one() - baseline_p / group_p)),
        Direction::Symmetric => (!baseline_p.is_zero()).then(|| (T::one() - group_p / baseline_p).abs()),
    }
}

/// Signed gap between a protected group and the other group.
pub fn pair_gap<T: Signed + PartialOrd + Copy>(
    protected_p: T,
    other_p: T,
    direction: Direction,
    op: DisparityOp,
) -> Result<T, AuditError> {
    let ratio = |num: T, den: T| {
        if den.is_zero() {
            Err(AuditError::UndefinedRatio)
        } else {
            Ok(num / den - T::one())
        }
    };
    match (op, direction) {
        (DisparityOp::Sub, Direction::HigherBetter) => Ok(other_p - protected_p),
        (DisparityOp::Sub, Direction::LowerBetter) => Ok(protected_p - other_p),
        (DisparityOp::Sub, Direction::Symmetric) => Ok((other_p - protected_p).abs()),
        (DisparityOp::Div, Direction::HigherBetter) => ratio(other_p, protected_p),
        (DisparityOp::Div, Direction::LowerBetter) => ratio(protected_p, other_p),
        (DisparityOp::Div, Direction::Symmetric) => ratio(other_p, protected_p).map(|r| r.abs()),
    }
}

/// Disparity of `group_p` against `baseline_p` under `cfg`; `None` when
/// undefined.
pub fn disparity<T: Signed + PartialOrd + Copy>(
    cfg: &DisparityConfig,
    baseline_p: T,
    group_p: T,
    direction: Direction,
) -> Option<T> {
    match (cfg.convention, cfg.op) {
        (Convention::Equation, DisparityOp::Sub) => Some(disparity_sub(baseline_p, group_p, direction)),
        (Convention::Equation, DisparityOp::Div) => disparity_div(baseline_p, group_p, direction),
        (Convention::Table, op) => pair_gap(group_p, baseline_p, direction, op).ok(),
    }
}

/// One (target, measure) cell of an audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityRecord {
    pub target_index: usize,
    pub target: String,
    pub mode: AuditMode,
    pub measure: Measure,
    pub group_value: Option<f64>,
    pub baseline_value: Option<f64>,
    /// For EO, the larger of the TPRP and FPRP disparities.
    pub disparity: Option<f64>,
    pub unfair: bool,
    pub applicable: bool,
}

/// Per-target counts that every record of the target was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub label: String,
    pub target: AuditTarget,
    pub matrix: ConfusionMatrix,
    pub baseline_matrix: ConfusionMatrix,
    pub rates: RateSet,
    /// Pairwise only: the groups share a bit or truly match each other.
    pub pair_overlapping: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: DisparityConfig,
    pub measures: Vec<Measure>,
    pub notes: Vec<String>,
    pub overall_matrix: ConfusionMatrix,
    pub overall_rates: RateSet,
    pub targets: Vec<TargetSummary>,
    pub records: Vec<DisparityRecord>,
    pub discriminated_single: Vec<GroupEncoding>,
    pub discriminated_pairwise: Vec<(GroupEncoding, GroupEncoding)>,
}

impl AuditReport {
    pub fn any_unfair(&self) -> bool {
        self.records.iter().any(|r| r.unfair)
    }

    pub fn record(&self, target_index: usize, measure: Measure) -> Option<&DisparityRecord> {
        self.records.iter().find(|r| r.target_index == target_index && r.measure == measure)
    }

    /// Number of targets flagged unfair under `measure`.
    pub fn unfair_count(&self, measure: Measure) -> usize {
        self.records.iter().filter(|r| r.measure == measure && r.unfair).count()
    }

    /// Labels of every target with at least one unfair record, in order.
    pub fn discriminated_labels(&self) -> Vec<&str> {
        self.targets
            .iter()
            .enumerate()
            .filter(|(i, _)| self.records.iter().any(|r| r.target_index == *i && r.unfair))
            .map(|(_, t)| t.label.as_str())
            .collect()
    }
}

pub fn convention_note(cfg: &DisparityConfig) -> String {
    let base = match cfg.baseline {
        Baseline::Overall => "overall population",
        Baseline::Complement => "complement group",
    };
    let form = match (cfg.convention, cfg.op) {
        (Convention::Equation, DisparityOp::Sub) => "clamped subtraction max(0, base - group) (operands swapped for lower-is-better)",
        (Convention::Equation, DisparityOp::Div) => "clamped division max(0, 1 - group/base) (operands swapped for lower-is-better)",
        (Convention::Table, DisparityOp::Sub) => "signed gap other - group (operands swapped for lower-is-better)",
        (Convention::Table, DisparityOp::Div) => "signed ratio other/group - 1 (operands swapped for lower-is-better); equation-form division 1 - ratio gives different numbers",
    };
    format!(
        "disparity: {form}; baseline: {base}; unfair when disparity > {}; EO is flagged when TPRP or FPRP is",
        cfg.tau
    )
}

struct Judged {
    group_value: Option<Prob>,
    baseline_value: Option<Prob>,
    disparity: Option<Prob>,
    unfair: bool,
}

fn judge_scalar(
    cfg: &DisparityConfig,
    measure: Measure,
    group: &ConfusionMatrix,
    base: &ConfusionMatrix,
    applicable: bool,
) -> Judged {
    let group_value = scalar_exact(measure, group);
    let baseline_value = scalar_exact(measure, base);
    let direction = measure.direction().expect("scalar measure has a direction");
    let disparity = match (group_value, baseline_value) {
        (Some(g), Some(b)) => disparity(cfg, b, g, direction),
        _ => None,
    };
    let unfair = applicable && disparity.is_some_and(|d| prob_to_f64(d) > cfg.tau);
    Judged { group_value, baseline_value, disparity, unfair }
}

fn validate_complement(universe: &GroupUniverse, target: &AuditTarget) -> Result<(), AuditError> {
    if target.encodings().iter().all(|e| universe.is_exclusive_singleton(e)) {
        Ok(())
    } else {
        Err(AuditError::ComplementUnsupported(target.label(universe)))
    }
}

fn evaluate_target(
    universe: &GroupUniverse,
    cs: &[Correspondence],
    index: usize,
    target: &AuditTarget,
    measures: &[Measure],
    cfg: &DisparityConfig,
    overall: &ConfusionMatrix,
) -> Result<(TargetSummary, Vec<DisparityRecord>), AuditError> {
    let label = target.label(universe);
    let (matrix, baseline_matrix, pair_overlapping) = match target {
        AuditTarget::Single { group } => {
            let m = accumulate_single(cs, group)?;
            let b = match cfg.baseline {
                Baseline::Overall => *overall,
                Baseline::Complement => accumulate_single_complement(cs, group)?,
            };
            (m, b, None)
        }
        AuditTarget::Pairwise { pair } => {
            let p = (&pair.0, &pair.1);
            let m = accumulate_pairwise(cs, p)?;
            let b = match cfg.baseline {
                Baseline::Overall => *overall,
                Baseline::Complement => accumulate_pairwise_complement(cs, p)?,
            };
            let overlapping = pair.0.intersects(&pair.1)
                || cs.iter().any(|c| c.truth.is_match() && legitimate_pairwise(c, p).unwrap_or(false));
            (m, b, Some(overlapping))
        }
    };

    let mode = target.mode();
    let has_rows = matrix.total() > 0;
    let mut records = Vec::with_capacity(measures.len());
    for &measure in measures {
        let applicable = has_rows && applicability(measure, mode, pair_overlapping.unwrap_or(false));
        let record = match measure.components() {
            None => {
                let j = judge_scalar(cfg, measure, &matrix, &baseline_matrix, applicable);
                DisparityRecord {
                    target_index: index,
                    target: label.clone(),
                    mode,
                    measure,
                    group_value: j.group_value.map(prob_to_f64),
                    baseline_value: j.baseline_value.map(prob_to_f64),
                    disparity: j.disparity.map(prob_to_f64),
                    unfair: j.unfair,
                    applicable,
                }
            }
            Some(parts) => {
                let judged: Vec<Judged> =
                    parts.iter().map(|&p| judge_scalar(cfg, p, &matrix, &baseline_matrix, applicable)).collect();
                let disparity = judged.iter().filter_map(|j| j.disparity).max();
                DisparityRecord {
                    target_index: index,
                    target: label.clone(),
                    mode,
                    measure,
                    group_value: None,
                    baseline_value: None,
                    disparity: disparity.map(prob_to_f64),
                    unfair: judged.iter().any(|j| j.unfair),
                    applicable,
                }
            }
        };
        records.push(record);
    }

    let summary = TargetSummary {
        label,
        target: target.clone(),
        matrix,
        baseline_matrix,
        rates: rates(&matrix),
        pair_overlapping,
    };
    Ok((summary, records))
}

/// Audits every target under every measure.
///
/// Targets without a single legitimate correspondence yield inapplicable
/// records rather than an error. Output order is target-major, then the
/// order of `measures`, independent of how evaluation is scheduled.
pub fn run_audit(
    universe: &GroupUniverse,
    cs: &[Correspondence],
    targets: &[AuditTarget],
    measures: &[Measure],
    cfg: &DisparityConfig,
) -> Result<AuditReport, AuditError> {
    cfg.validate()?;
    for t in targets {
        for e in t.encodings() {
            universe.check_len(e)?;
        }
        if cfg.baseline == Baseline::Complement {
            validate_complement(universe, t)?;
        }
    }
    let overall = overall_matrix(cs)?;

    let evaluated: Vec<(TargetSummary, Vec<DisparityRecord>)> = targets
        .par_iter()
        .enumerate()
        .map(|(i, t)| evaluate_target(universe, cs, i, t, measures, cfg, &overall))
        .collect::<Result<_, _>>()?;

    let mut summaries = Vec::with_capacity(evaluated.len());
    let mut records = Vec::new();
    let mut discriminated_single = Vec::new();
    let mut discriminated_pairwise = Vec::new();
    for (summary, recs) in evaluated {
        if recs.iter().any(|r| r.unfair) {
            match &summary.target {
                AuditTarget::Single { group } => discriminated_single.push(group.clone()),
                AuditTarget::Pairwise { pair } => discriminated_pairwise.push(pair.clone()),
            }
        }
        summaries.push(summary);
        records.extend(recs);
    }

    Ok(AuditReport {
        config: *cfg,
        measures: measures.to_vec(),
        notes: vec![convention_note(cfg)],
        overall_matrix: overall,
        overall_rates: rates(&overall),
        targets: summaries,
        records,
        discriminated_single,
        discriminated_pairwise,
    })
}

/// Every level-1 group as a single-fairness target.
pub fn single_targets(universe: &GroupUniverse) -> Vec<AuditTarget> {
    crate::groups::enumerate_level_k_subgroups(universe, 1, false).into_iter().map(AuditTarget::single).collect()
}

/// Every unordered pair of level-1 groups, including a group with itself.
pub fn pairwise_targets(universe: &GroupUniverse) -> Vec<AuditTarget> {
    let groups = crate::groups::enumerate_level_k_subgroups(universe, 1, false);
    let mut out = Vec::new();
    for i in 0..groups.len() {
        for j in i..groups.len() {
            out.push(AuditTarget::pairwise(groups[i].clone(), groups[j].clone()));
        }
    }
    out
}
