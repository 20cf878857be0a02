//! Run configuration file (TOML).
//!
//! ```toml
//! [[universe.attributes]]
//! name = "country"
//! kind = "binary"
//! domain = ["cn", "de"]
//!
//! [data]
//! output_dir = "out"
//!
//! [audit]
//! modes = ["single"]
//! measures = ["TPRP", "PPVP"]
//! tau = 0.2
//! disparity = "div"
//! convention = "table"
//! baseline = "complement"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{Baseline, Convention, DisparityConfig, DisparityOp};
use crate::datagen::GenConfig;
use crate::dataset::{AuditMode, AuditTarget};
use crate::groups::{enumerate_level_k_subgroups, GroupError, GroupUniverse, SensitiveAttribute};
use crate::matchers::{RuleSet, Scorer};
use crate::measures::Measure;
use crate::sensitivity::{default_thresholds, SensitivityNorm};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

fn field(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, reason: reason.into() }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub universe: Option<UniverseConfig>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub audit: AuditSection,
    pub matcher: Option<MatcherSection>,
    pub sweep: Option<SweepSection>,
    pub generate: Option<GenerateSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniverseConfig {
    pub attributes: Vec<SensitiveAttribute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Labelled pairs to be matched (defaults to `<output_dir>/pairs.csv`).
    pub correspondences: Option<PathBuf>,
    /// Pairs with scores and/or predictions (defaults to
    /// `<output_dir>/predictions.csv`).
    pub predictions: Option<PathBuf>,
    pub left_table: Option<PathBuf>,
    pub right_table: Option<PathBuf>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            output_dir: default_out(),
            correspondences: None,
            predictions: None,
            left_table: None,
            right_table: None,
        }
    }
}

impl DataConfig {
    pub fn correspondences_path(&self) -> PathBuf {
        self.correspondences.clone().unwrap_or_else(|| self.output_dir.join("pairs.csv"))
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.predictions.clone().unwrap_or_else(|| self.output_dir.join("predictions.csv"))
    }

    pub fn left_path(&self) -> PathBuf {
        self.left_table.clone().unwrap_or_else(|| self.output_dir.join("left.csv"))
    }

    pub fn right_path(&self) -> PathBuf {
        self.right_table.clone().unwrap_or_else(|| self.output_dir.join("right.csv"))
    }
}

/// `"all"` or an explicit list of measure ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Keyword(String),
    List(Vec<Measure>),
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec::Keyword("all".into())
    }
}

impl MeasureSpec {
    pub fn resolve(&self) -> Result<Vec<Measure>, ConfigError> {
        match self {
            MeasureSpec::Keyword(k) if k.eq_ignore_ascii_case("all") => Ok(Measure::ALL.to_vec()),
            MeasureSpec::Keyword(k) => {
                k.split(',').map(|m| m.parse().map_err(|e: String| field("audit.measures", e))).collect()
            }
            MeasureSpec::List(v) if v.is_empty() => Err(field("audit.measures", "empty list")),
            MeasureSpec::List(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default = "default_modes")]
    pub modes: Vec<AuditMode>,
    /// Intersection level of enumerated targets.
    #[serde(default = "default_level")]
    pub level: usize,
    #[serde(default)]
    pub include_pure_setwise: bool,
    /// Explicit single targets; each entry is a set of group values.
    pub groups: Option<Vec<Vec<String>>>,
    /// Explicit pairwise targets.
    pub pairs: Option<Vec<(Vec<String>, Vec<String>)>>,
    #[serde(default)]
    pub measures: MeasureSpec,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_op")]
    pub disparity: DisparityOp,
    #[serde(default = "default_convention")]
    pub convention: Convention,
    #[serde(default = "default_baseline")]
    pub baseline: Baseline,
    /// When set, decisions are recomputed from scores at this threshold.
    pub threshold: Option<f64>,
}

fn default_modes() -> Vec<AuditMode> {
    vec![AuditMode::Single]
}
fn default_level() -> usize {
    1
}
fn default_tau() -> f64 {
    0.2
}
fn default_op() -> DisparityOp {
    DisparityOp::Sub
}
fn default_convention() -> Convention {
    Convention::Equation
}
fn default_baseline() -> Baseline {
    Baseline::Overall
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            modes: default_modes(),
            level: default_level(),
            include_pure_setwise: false,
            groups: None,
            pairs: None,
            measures: MeasureSpec::default(),
            tau: default_tau(),
            disparity: default_op(),
            convention: default_convention(),
            baseline: default_baseline(),
            threshold: None,
        }
    }
}

impl AuditSection {
    pub fn disparity_config(&self) -> DisparityConfig {
        DisparityConfig { tau: self.tau, op: self.disparity, convention: self.convention, baseline: self.baseline }
    }

    /// Targets for every configured mode: explicit lists when given,
    /// otherwise the level-k subgroups (pairwise: every unordered pair of
    /// them, a subgroup with itself included).
    pub fn targets(&self, universe: &GroupUniverse) -> Result<Vec<AuditTarget>, ConfigError> {
        if self.level == 0 {
            return Err(field("audit.level", "must be at least 1"));
        }
        let enumerated = || enumerate_level_k_subgroups(universe, self.level, self.include_pure_setwise);
        let mut out = Vec::new();
        for mode in &self.modes {
            match mode {
                AuditMode::Single => match &self.groups {
                    Some(gs) => {
                        for g in gs {
                            out.push(AuditTarget::single(universe.encode(g)?));
                        }
                    }
                    None => out.extend(enumerated().into_iter().map(AuditTarget::single)),
                },
                AuditMode::Pairwise => match &self.pairs {
                    Some(ps) => {
                        for (a, b) in ps {
                            out.push(AuditTarget::pairwise(universe.encode(a)?, universe.encode(b)?));
                        }
                    }
                    None => {
                        let gs = enumerated();
                        for i in 0..gs.len() {
                            for j in i..gs.len() {
                                out.push(AuditTarget::pairwise(gs[i].clone(), gs[j].clone()));
                            }
                        }
                    }
                },
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatcherSection {
    pub rules: Option<RuleSet>,
    pub scorer: Option<Scorer>,
    /// Decision threshold applied to scores when no rule set is given.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub thresholds: Option<Vec<f64>>,
    #[serde(default = "default_sweep_measure")]
    pub measure: Measure,
    #[serde(default)]
    pub norm: SensitivityNorm,
    /// Row label in the heat-map table.
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_sweep_measure() -> Measure {
    Measure::TPRP
}
fn default_label() -> String {
    "matcher".into()
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            thresholds: None,
            measure: default_sweep_measure(),
            norm: SensitivityNorm::default(),
            label: default_label(),
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Vec<f64> {
        self.thresholds.clone().unwrap_or_else(default_thresholds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSection {
    /// Source entity table.
    pub source: Option<PathBuf>,
    /// Rows per group of a synthetic source, used when `source` is absent.
    pub synthetic_rows: Option<Vec<usize>>,
    #[serde(flatten)]
    pub gen: GenConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Loads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let mut cfg = RunConfig::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.output_dir);
        for p in [
            &mut self.data.correspondences,
            &mut self.data.predictions,
            &mut self.data.left_table,
            &mut self.data.right_table,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(g) = self.generate.as_mut().and_then(|g| g.source.as_mut()) {
            fix(g);
        }
    }

    /// The declared universe, or the one implied by the generator section.
    pub fn universe(&self) -> Result<GroupUniverse, ConfigError> {
        match (&self.universe, &self.generate) {
            (Some(u), _) => Ok(GroupUniverse::new(u.attributes.clone())?),
            (None, Some(g)) => Ok(g.gen.universe()?),
            (None, None) => Err(field("universe", "no sensitive attributes declared")),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.audit.tau.is_finite() || self.audit.tau < 0.0 {
            return Err(field("audit.tau", "must be a non-negative number"));
        }
        if let Some(t) = self.audit.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(field("audit.threshold", "must lie in [0, 1]"));
            }
        }
        if self.audit.modes.is_empty() {
            return Err(field("audit.modes", "at least one mode is required"));
        }
        if let Some(m) = &self.matcher {
            if m.rules.is_none() && m.scorer.is_none() {
                return Err(field("matcher", "needs `rules` or `scorer`"));
            }
            if !(0.0..=1.0).contains(&m.threshold) {
                return Err(field("matcher.threshold", "must lie in [0, 1]"));
            }
        }
        self.audit.measures.resolve()?;
        Ok(())
    }
}
