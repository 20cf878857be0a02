//! Baseline matchers: boolean similarity rules and weighted score thresholds.

pub mod similarity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Correspondence, EntityTable, Label, Record};
pub use similarity::{similarity, similarity_with, Feature, SimilarityOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatcherError {
    #[error("attribute `{0}` is missing from a record")]
    MissingAttribute(String),
    #[error("entity `{0}` not found in its table")]
    UnknownEntity(String),
    #[error("invalid matcher configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Gt,
    Ge,
    Eq,
    Lt,
    Le,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Eq => value == threshold,
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityPredicate {
    pub attribute: String,
    pub feature: Feature,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl SimilarityPredicate {
    pub fn new(attribute: &str, feature: Feature, comparator: Comparator, threshold: f64) -> Self {
        SimilarityPredicate { attribute: attribute.to_string(), feature, comparator, threshold }
    }

    fn eval(&self, opts: SimilarityOptions, left: &Record<'_>, right: &Record<'_>) -> Result<bool, MatcherError> {
        let a = left.get(&self.attribute).ok_or_else(|| MatcherError::MissingAttribute(self.attribute.clone()))?;
        let b = right.get(&self.attribute).ok_or_else(|| MatcherError::MissingAttribute(self.attribute.clone()))?;
        Ok(self.comparator.holds(similarity_with(opts, self.feature, a, b), self.threshold))
    }
}

/// A disjunction of conjunctions of similarity predicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub clauses: Vec<Vec<SimilarityPredicate>>,
    #[serde(default = "default_true")]
    pub lowercase: bool,
}

fn default_true() -> bool {
    true
}

impl RuleSet {
    pub fn new(clauses: Vec<Vec<SimilarityPredicate>>) -> Result<Self, MatcherError> {
        let rules = RuleSet { clauses, lowercase: true };
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<(), MatcherError> {
        if self.clauses.is_empty() || self.clauses.iter().any(Vec::is_empty) {
            return Err(MatcherError::Config("rule set needs at least one non-empty clause".into()));
        }
        for p in self.clauses.iter().flatten() {
            if !(0.0..=1.0).contains(&p.threshold) {
                return Err(MatcherError::Config(format!(
                    "threshold {} on `{}` outside [0, 1]",
                    p.threshold, p.attribute
                )));
            }
        }
        Ok(())
    }
}

pub fn rule_match(rules: &RuleSet, left: &Record<'_>, right: &Record<'_>) -> Result<Label, MatcherError> {
    let opts = SimilarityOptions { lowercase: rules.lowercase };
    for clause in &rules.clauses {
        let mut all = true;
        for p in clause {
            if !p.eval(opts, left, right)? {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Label::Match);
        }
    }
    Ok(Label::NonMatch)
}

/// Match iff `score` is strictly above `threshold`.
pub fn score_match(score: f64, threshold: f64) -> Label {
    if score > threshold {
        Label::Match
    } else {
        Label::NonMatch
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedFeature {
    pub attribute: String,
    pub feature: Feature,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

/// Weighted mean of similarity features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorer {
    pub features: Vec<WeightedFeature>,
    #[serde(default = "default_true")]
    pub lowercase: bool,
}

impl Scorer {
    pub fn new(features: Vec<WeightedFeature>) -> Result<Self, MatcherError> {
        let s = Scorer { features, lowercase: true };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), MatcherError> {
        if self.features.iter().any(|f| !f.weight.is_finite() || f.weight < 0.0) {
            return Err(MatcherError::Config("feature weights must be non-negative".into()));
        }
        if self.features.iter().map(|f| f.weight).sum::<f64>() <= 0.0 {
            return Err(MatcherError::Config("feature weights must sum to a positive value".into()));
        }
        Ok(())
    }

    pub fn score(&self, left: &Record<'_>, right: &Record<'_>) -> Result<f64, MatcherError> {
        let opts = SimilarityOptions { lowercase: self.lowercase };
        let mut num = 0.0;
        let mut den = 0.0;
        for f in &self.features {
            let a = left.get(&f.attribute).ok_or_else(|| MatcherError::MissingAttribute(f.attribute.clone()))?;
            let b = right.get(&f.attribute).ok_or_else(|| MatcherError::MissingAttribute(f.attribute.clone()))?;
            num += f.weight * similarity_with(opts, f.feature, a, b);
            den += f.weight;
        }
        Ok((num / den).clamp(0.0, 1.0))
    }
}

fn resolve<'a>(
    left: &'a EntityTable,
    right: &'a EntityTable,
    pairs: &[Correspondence],
) -> Result<Vec<(Record<'a>, Record<'a>)>, MatcherError> {
    let li = left.id_index();
    let ri = right.id_index();
    pairs
        .iter()
        .map(|c| {
            let l = li.get(c.id_left.as_str()).ok_or_else(|| MatcherError::UnknownEntity(c.id_left.clone()))?;
            let r = ri.get(c.id_right.as_str()).ok_or_else(|| MatcherError::UnknownEntity(c.id_right.clone()))?;
            Ok((left.record(*l), right.record(*r)))
        })
        .collect()
}

/// Scores every pair; decisions are cleared.
pub fn score_correspondences(
    left: &EntityTable,
    right: &EntityTable,
    pairs: &[Correspondence],
    scorer: &Scorer,
) -> Result<Vec<Correspondence>, MatcherError> {
    scorer.validate()?;
    let records = resolve(left, right, pairs)?;
    pairs
        .iter()
        .zip(records)
        .map(|(c, (l, r))| Ok(Correspondence { score: Some(scorer.score(&l, &r)?), decision: None, ..c.clone() }))
        .collect()
}

/// Fills decisions by evaluating `rules` on every pair.
pub fn apply_rules(
    left: &EntityTable,
    right: &EntityTable,
    pairs: &[Correspondence],
    rules: &RuleSet,
) -> Result<Vec<Correspondence>, MatcherError> {
    rules.validate()?;
    let records = resolve(left, right, pairs)?;
    pairs
        .iter()
        .zip(records)
        .map(|(c, (l, r))| Ok(Correspondence { decision: Some(rule_match(rules, &l, &r)?), ..c.clone() }))
        .collect()
}

/// Recomputes decisions from scores at `threshold`.
pub fn apply_threshold(cs: &mut [Correspondence], threshold: f64) -> Result<(), MatcherError> {
    for c in cs.iter_mut() {
        let s = c
            .score
            .ok_or_else(|| MatcherError::Config(format!("pair ({}, {}) has no score", c.id_left, c.id_right)))?;
        c.decision = Some(score_match(s, threshold));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[&str; 3]]) -> EntityTable {
        let mut t = EntityTable::new(vec!["id".into(), "year".into(), "title".into()]);
        for r in rows {
            t.rows.push(r.iter().map(|s| s.to_string()).collect());
        }
        t
    }

    fn rules() -> RuleSet {
        RuleSet::new(vec![vec![
            SimilarityPredicate::new("year", Feature::Exact, Comparator::Eq, 1.0),
            SimilarityPredicate::new("title", Feature::Levenshtein, Comparator::Gt, 0.5),
        ]])
        .unwrap()
    }

    #[test]
    fn rule_examples() {
        let t = table(&[
            ["1", "2004", "Fairness in entity matching"],
            ["2", "2005", "Fairness in entity matching"],
            ["3", "2004", "Fairnes in entity matchng"],
        ]);
        let r = rules();
        assert_eq!(rule_match(&r, &t.record(0), &t.record(0)).unwrap(), Label::Match);
        assert_eq!(rule_match(&r, &t.record(0), &t.record(1)).unwrap(), Label::NonMatch);
        assert_eq!(rule_match(&r, &t.record(0), &t.record(2)).unwrap(), Label::Match);
        let bad =
            RuleSet::new(vec![vec![SimilarityPredicate::new("venue", Feature::Exact, Comparator::Eq, 1.0)]]).unwrap();
        assert_eq!(rule_match(&bad, &t.record(0), &t.record(0)), Err(MatcherError::MissingAttribute("venue".into())));
    }

    #[test]
    fn disjunction() {
        let t = table(&[["1", "2004", "abc"], ["2", "2005", "abc"]]);
        let mut r = rules();
        r.clauses.push(vec![SimilarityPredicate::new("title", Feature::Exact, Comparator::Eq, 1.0)]);
        assert_eq!(rule_match(&r, &t.record(0), &t.record(1)).unwrap(), Label::Match);
    }

    #[test]
    fn rule_validation() {
        assert!(RuleSet::new(vec![]).is_err());
        assert!(RuleSet::new(vec![vec![]]).is_err());
        assert!(RuleSet::new(vec![vec![SimilarityPredicate::new("a", Feature::Exact, Comparator::Gt, 1.5)]]).is_err());
    }

    #[test]
    fn strict_threshold() {
        assert_eq!(score_match(0.51, 0.5), Label::Match);
        assert_eq!(score_match(0.5, 0.5), Label::NonMatch);
        assert_eq!(score_match(0.3, 0.9), Label::NonMatch);
    }

    #[test]
    fn scorer_examples() {
        let t = table(&[["1", "2004", "abc"], ["2", "2004", "xyz"]]);
        let one =
            Scorer::new(vec![WeightedFeature { attribute: "title".into(), feature: Feature::Exact, weight: 1.0 }])
                .unwrap();
        assert_eq!(one.score(&t.record(0), &t.record(0)).unwrap(), 1.0);
        let two = Scorer::new(vec![
            WeightedFeature { attribute: "year".into(), feature: Feature::Exact, weight: 1.0 },
            WeightedFeature { attribute: "title".into(), feature: Feature::Exact, weight: 1.0 },
        ])
        .unwrap();
        assert_eq!(two.score(&t.record(0), &t.record(1)).unwrap(), 0.5);
        assert!(Scorer::new(vec![]).is_err());
        assert!(Scorer::new(vec![WeightedFeature { attribute: "x".into(), feature: Feature::Exact, weight: -1.0 }])
            .is_err());
    }
}
