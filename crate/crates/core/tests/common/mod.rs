//! Shared test support: an independent brute-force audit reference, random
//! instance strategies and fixture loaders.
#![allow(dead_code)]

use std::fs::File;
use std::path::PathBuf;

use emaudit::audit::{
    pairwise_targets, single_targets, AuditReport, Baseline, Convention, DisparityConfig, DisparityOp,
};
use emaudit::datagen::{generate_nofly, synthetic_source, GenConfig, Recipe};
use emaudit::dataset::{load_correspondences, AuditTarget, Correspondence, FormatConfig, Label};
use emaudit::groups::{enumerate_level_k_subgroups, AttributeKind, GroupEncoding, GroupUniverse, SensitiveAttribute};
use emaudit::matchers::score_match;
use emaudit::measures::Measure;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

pub type Q = Ratio<i64>;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

// ---------------------------------------------------------------------------
// Reference implementation, written against the definitions rather than the
// library: every audited side (single) or pair (pairwise) is expanded into a
// (predicted, actual) observation and rates are conditional frequencies.

#[derive(Debug, Clone, Copy)]
struct Obs {
    pred: bool,
    truth: bool,
}

fn has(entity: &GroupEncoding, group: &GroupEncoding) -> bool {
    group.ones().all(|i| entity.get(i))
}

fn obs(c: &Correspondence) -> Obs {
    Obs { pred: c.decision == Some(Label::Match), truth: c.truth == Label::Match }
}

fn pair_legit(c: &Correspondence, s: &GroupEncoding, t: &GroupEncoding) -> bool {
    (has(&c.groups_left, s) && has(&c.groups_right, t)) || (has(&c.groups_left, t) && has(&c.groups_right, s))
}

/// Observations inside the target and inside its complement.
fn expand(cs: &[Correspondence], target: &AuditTarget) -> (Vec<Obs>, Vec<Obs>) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for c in cs {
        match target {
            AuditTarget::Single { group } => {
                for side in [&c.groups_left, &c.groups_right] {
                    if has(side, group) {
                        inside.push(obs(c));
                    } else {
                        outside.push(obs(c));
                    }
                }
            }
            AuditTarget::Pairwise { pair } => {
                if pair_legit(c, &pair.0, &pair.1) {
                    inside.push(obs(c));
                } else {
                    outside.push(obs(c));
                }
            }
        }
    }
    (inside, outside)
}

/// `P(event | given)` over the observations, `None` when nothing is given.
fn cond(os: &[Obs], event: impl Fn(&Obs) -> bool, given: impl Fn(&Obs) -> bool) -> Option<Q> {
    let pool: Vec<&Obs> = os.iter().filter(|o| given(o)).collect();
    if pool.is_empty() {
        return None;
    }
    let hits = pool.iter().filter(|o| event(o)).count();
    Some(Q::new(hits as i64, pool.len() as i64))
}

fn oracle_value(m: Measure, os: &[Obs]) -> Option<Q> {
    match m {
        Measure::AP => cond(os, |o| o.pred == o.truth, |_| true),
        Measure::SP => cond(os, |o| o.pred, |_| true),
        Measure::TPRP => cond(os, |o| o.pred, |o| o.truth),
        Measure::FNRP => cond(os, |o| !o.pred, |o| o.truth),
        Measure::FPRP => cond(os, |o| o.pred, |o| !o.truth),
        Measure::TNRP => cond(os, |o| !o.pred, |o| !o.truth),
        Measure::PPVP => cond(os, |o| o.truth, |o| o.pred),
        Measure::FDRP => cond(os, |o| !o.truth, |o| o.pred),
        Measure::NPVP => cond(os, |o| !o.truth, |o| !o.pred),
        Measure::FORP => cond(os, |o| o.truth, |o| !o.pred),
        Measure::EO => None,
    }
}

/// +1 when larger values are better, -1 when smaller are, 0 for "equal".
fn orientation(m: Measure) -> i32 {
    match m {
        Measure::AP | Measure::TPRP | Measure::TNRP | Measure::PPVP | Measure::NPVP => 1,
        Measure::FPRP | Measure::FNRP | Measure::FDRP | Measure::FORP => -1,
        Measure::SP => 0,
        Measure::EO => unreachable!(),
    }
}

fn oracle_disparity(cfg: &DisparityConfig, m: Measure, group: Q, base: Q) -> Option<Q> {
    let zero = Q::from_integer(0);
    let one = Q::from_integer(1);
    let o = orientation(m);
    match (cfg.convention, cfg.op) {
        (Convention::Equation, DisparityOp::Sub) => Some(match o {
            1 => (base - group).max(zero),
            -1 => (group - base).max(zero),
            _ => (base - group).abs(),
        }),
        (Convention::Equation, DisparityOp::Div) => match o {
            1 if base != zero => Some((one - group / base).max(zero)),
            -1 if group != zero => Some((one - base / group).max(zero)),
            0 if base != zero => Some((one - group / base).abs()),
            _ => None,
        },
        (Convention::Table, DisparityOp::Sub) => Some(match o {
            1 => base - group,
            -1 => group - base,
            _ => (base - group).abs(),
        }),
        (Convention::Table, DisparityOp::Div) => match o {
            1 if group != zero => Some(base / group - one),
            -1 if base != zero => Some(group / base - one),
            0 if group != zero => Some((base / group - one).abs()),
            _ => None,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCell {
    pub applicable: bool,
    pub group_value: Option<Q>,
    pub baseline_value: Option<Q>,
    pub disparity: Option<Q>,
    pub unfair: bool,
}

fn needs_true_match_pair(m: Measure) -> bool {
    !matches!(m, Measure::AP | Measure::SP | Measure::FPRP | Measure::TNRP)
}

pub fn oracle_cell(cs: &[Correspondence], target: &AuditTarget, m: Measure, cfg: &DisparityConfig) -> OracleCell {
    let (inside, outside) = expand(cs, target);
    let everything: Vec<Obs> = cs.iter().map(obs).collect();
    let base_obs = match cfg.baseline {
        Baseline::Overall => &everything,
        Baseline::Complement => &outside,
    };
    let applicable = !inside.is_empty()
        && match target {
            AuditTarget::Single { .. } => true,
            AuditTarget::Pairwise { pair } => {
                !needs_true_match_pair(m)
                    || pair.0.intersects(&pair.1)
                    || cs.iter().any(|c| c.truth == Label::Match && pair_legit(c, &pair.0, &pair.1))
            }
        };
    let judge = |m: Measure| {
        let g = oracle_value(m, &inside);
        let b = oracle_value(m, base_obs);
        let d = match (g, b) {
            (Some(g), Some(b)) => oracle_disparity(cfg, m, g, b),
            _ => None,
        };
        let unfair = applicable && d.is_some_and(|d| d.to_f64().unwrap() > cfg.tau);
        (g, b, d, unfair)
    };
    if m == Measure::EO {
        let (_, _, d1, u1) = judge(Measure::TPRP);
        let (_, _, d2, u2) = judge(Measure::FPRP);
        OracleCell {
            applicable,
            group_value: None,
            baseline_value: None,
            disparity: d1.into_iter().chain(d2).max(),
            unfair: u1 || u2,
        }
    } else {
        let (g, b, d, unfair) = judge(m);
        OracleCell { applicable, group_value: g, baseline_value: b, disparity: d, unfair }
    }
}

fn to_f(q: Option<Q>) -> Option<f64> {
    q.map(|q| q.to_f64().unwrap())
}

/// Compares every record and matrix of `report` with the reference.
pub fn check_report(inst: &Instance, report: &AuditReport) -> Result<(), String> {
    let measures = &report.measures;
    if report.records.len() != inst.targets.len() * measures.len() {
        return Err("record count".into());
    }
    let everything: Vec<Obs> = inst.cs.iter().map(obs).collect();
    let count = |os: &[Obs], p: bool, t: bool| os.iter().filter(|o| o.pred == p && o.truth == t).count() as u64;
    let om = &report.overall_matrix;
    if (om.tp, om.fp, om.fn_, om.tn)
        != (
            count(&everything, true, true),
            count(&everything, true, false),
            count(&everything, false, true),
            count(&everything, false, false),
        )
    {
        return Err("overall matrix".into());
    }
    for (ti, target) in inst.targets.iter().enumerate() {
        let (inside, _) = expand(&inst.cs, target);
        let m = &report.targets[ti].matrix;
        let expected = (
            count(&inside, true, true),
            count(&inside, true, false),
            count(&inside, false, true),
            count(&inside, false, false),
        );
        if (m.tp, m.fp, m.fn_, m.tn) != expected {
            return Err(format!("matrix of target {ti}: {m:?} vs {expected:?}"));
        }
        for (mi, &measure) in measures.iter().enumerate() {
            let r = &report.records[ti * measures.len() + mi];
            let o = oracle_cell(&inst.cs, target, measure, &inst.cfg);
            let got = (r.applicable, r.group_value, r.baseline_value, r.disparity, r.unfair);
            let want = (o.applicable, to_f(o.group_value), to_f(o.baseline_value), to_f(o.disparity), o.unfair);
            if r.measure != measure || got != want {
                return Err(format!("target {ti} {measure}: got {got:?}, want {want:?}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random instances.

#[derive(Debug, Clone)]
pub struct Instance {
    pub universe: GroupUniverse,
    pub cs: Vec<Correspondence>,
    pub cfg: DisparityConfig,
    pub targets: Vec<AuditTarget>,
}

/// A universe of at most `max_groups` flattened groups.
pub fn universe_strategy(max_groups: usize) -> impl Strategy<Value = GroupUniverse> {
    prop::collection::vec((0u8..3, 1usize..=3), 1..=3).prop_map(move |specs| {
        let mut attrs = Vec::new();
        let mut used = 0;
        for (ai, (kind, size)) in specs.into_iter().enumerate() {
            let (kind, size) = match kind {
                0 => (AttributeKind::Binary, 2),
                1 => (AttributeKind::MultiExclusive, size.max(2)),
                _ => (AttributeKind::Setwise, size),
            };
            if used + size > max_groups {
                break;
            }
            used += size;
            let domain: Vec<String> = (0..size).map(|v| format!("a{ai}v{v}")).collect();
            attrs.push(SensitiveAttribute { name: format!("a{ai}"), kind, domain });
        }
        GroupUniverse::new(attrs).expect("generated universe is valid")
    })
}

/// A valid entity encoding derived from random bits.
pub fn entity_from_bits(u: &GroupUniverse, mut bits: u64) -> GroupEncoding {
    let mut enc = GroupEncoding::zeros(u.size());
    let mut offset = 0;
    for a in u.attributes() {
        let n = a.domain.len();
        if a.kind.is_exclusive() {
            enc.set(offset + (bits % n as u64) as usize);
            bits /= n as u64;
        } else {
            for v in 0..n {
                if bits & 1 == 1 {
                    enc.set(offset + v);
                }
                bits >>= 1;
            }
        }
        offset += n;
    }
    enc
}

pub fn correspondences_strategy(u: GroupUniverse, max_rows: usize) -> impl Strategy<Value = Vec<Correspondence>> {
    prop::collection::vec((any::<u64>(), any::<u64>(), 0.0..1.0f64, 0u8..10, 0u8..3), 0..=max_rows).prop_map(
        move |rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (l, r, score, truth, t))| {
                    let threshold = [0.3, 0.5, 0.7][t as usize];
                    Correspondence {
                        id_left: format!("l{i}"),
                        id_right: format!("r{i}"),
                        groups_left: entity_from_bits(&u, l),
                        groups_right: entity_from_bits(&u, r),
                        score: Some(score),
                        decision: Some(if score > threshold { Label::Match } else { Label::NonMatch }),
                        truth: if truth < 3 { Label::Match } else { Label::NonMatch },
                    }
                })
                .collect()
        },
    )
}

pub fn config_strategy() -> impl Strategy<Value = DisparityConfig> {
    (any::<bool>(), any::<bool>(), any::<bool>(), prop::sample::select(vec![0.0, 0.05, 0.2, 0.5])).prop_map(
        |(div, table, complement, tau)| DisparityConfig {
            tau,
            op: if div { DisparityOp::Div } else { DisparityOp::Sub },
            convention: if table { Convention::Table } else { Convention::Equation },
            baseline: if complement { Baseline::Complement } else { Baseline::Overall },
        },
    )
}

fn exclusive_singleton(u: &GroupUniverse, e: &GroupEncoding) -> bool {
    e.count_ones() == 1 && e.ones().all(|i| u.attribute_of(i).kind.is_exclusive())
}

/// Level-1 and level-2 single targets plus every pair of level-1 groups;
/// restricted to exclusive singletons under a complement baseline.
pub fn targets_for(u: &GroupUniverse, cfg: &DisparityConfig) -> Vec<AuditTarget> {
    let level1 = enumerate_level_k_subgroups(u, 1, false);
    let mut singles = level1.clone();
    singles.extend(enumerate_level_k_subgroups(u, 2, true));
    let mut out: Vec<AuditTarget> = singles.into_iter().map(AuditTarget::single).collect();
    for i in 0..level1.len() {
        for j in i..level1.len() {
            out.push(AuditTarget::pairwise(level1[i].clone(), level1[j].clone()));
        }
    }
    if cfg.baseline == Baseline::Complement {
        out.retain(|t| t.encodings().iter().all(|e| exclusive_singleton(u, e)));
    }
    out
}

pub fn instance_strategy(max_groups: usize, max_rows: usize) -> impl Strategy<Value = Instance> {
    (universe_strategy(max_groups), config_strategy()).prop_flat_map(move |(u, cfg)| {
        let targets = targets_for(&u, &cfg);
        correspondences_strategy(u.clone(), max_rows).prop_map(move |cs| Instance {
            universe: u.clone(),
            cs,
            cfg,
            targets: targets.clone(),
        })
    })
}

// ---------------------------------------------------------------------------
// Rate-table fixtures: per-matcher rates of a protected and an other group.

#[derive(Debug, Clone, serde::Deserialize)]
pub struct RateRow {
    pub matcher: String,
    pub measure: String,
    pub protected: f64,
    pub other: f64,
    pub sub: f64,
    pub div: f64,
    pub bold: bool,
}

pub fn rate_rows(file: &str) -> Vec<RateRow> {
    let mut r = csv::Reader::from_path(fixture(file)).expect("fixture exists");
    r.deserialize().map(|row| row.expect("well-formed fixture row")).collect()
}

/// Two-decimal rate as an exact fraction.
pub fn cents(v: f64) -> Q {
    Q::new((v * 100.0).round() as i64, 100)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Matrix counts (tp, fp, fn, tn) with exactly the given TPR and PPV, both
/// in hundredths and non-zero.
pub fn counts_for(tpr: i64, ppv: i64) -> (u64, u64, u64, u64) {
    let tp = tpr * ppv / gcd(tpr, ppv);
    let fn_ = tp / tpr * (100 - tpr);
    let fp = tp / ppv * (100 - ppv);
    (tp as u64, fp as u64, fn_ as u64, 10)
}

/// Pairs whose two sides both carry `group`, realising the given matrix.
pub fn rows_for(u: &GroupUniverse, group: &str, counts: (u64, u64, u64, u64), tag: &str) -> Vec<Correspondence> {
    let enc = u.encode([group]).unwrap();
    let (tp, fp, fn_, tn) = counts;
    let mut out = Vec::new();
    for (n, pred, truth) in [
        (tp, Label::Match, Label::Match),
        (fp, Label::Match, Label::NonMatch),
        (fn_, Label::NonMatch, Label::Match),
        (tn, Label::NonMatch, Label::NonMatch),
    ] {
        for _ in 0..n {
            let i = out.len();
            out.push(Correspondence {
                id_left: format!("{tag}{group}L{i}"),
                id_right: format!("{tag}{group}R{i}"),
                groups_left: enc.clone(),
                groups_right: enc.clone(),
                score: None,
                decision: Some(pred),
                truth,
            });
        }
    }
    out
}

/// The two-group universe and pair set realising one matcher's TPR/PPV rows
/// of a rate table; `precision_is_fdr` reads the second measure as FDR.
pub fn matcher_dataset(
    groups: [&str; 2],
    tpr: (f64, f64),
    second: (f64, f64),
    precision_is_fdr: bool,
) -> (GroupUniverse, Vec<Correspondence>) {
    let u = GroupUniverse::new(vec![SensitiveAttribute::new("group", AttributeKind::Binary, &groups)]).unwrap();
    let ppv = |v: f64| {
        let c = (v * 100.0).round() as i64;
        if precision_is_fdr {
            100 - c
        } else {
            c
        }
    };
    let pct = |v: f64| (v * 100.0).round() as i64;
    let mut cs = rows_for(&u, groups[0], counts_for(pct(tpr.0), ppv(second.0)), "");
    cs.extend(rows_for(&u, groups[1], counts_for(pct(tpr.1), ppv(second.1)), ""));
    (u, cs)
}

pub fn measure_id(short: &str) -> Measure {
    format!("{short}P").parse().unwrap()
}

// ---------------------------------------------------------------------------
// Fixed fixtures.

/// Every fixed audit fixture: (universe, pairs, targets, config).
pub fn audit_fixtures() -> Vec<(GroupUniverse, Vec<Correspondence>, Vec<AuditTarget>, DisparityConfig)> {
    let mut out = Vec::new();

    let u = GroupUniverse::new(vec![SensitiveAttribute::new("grp", AttributeKind::Binary, &["g1", "g2"])]).unwrap();
    let cs = load_correspondences(
        File::open(fixture("worked_example/predictions.csv")).unwrap(),
        &u,
        &FormatConfig::default(),
    )
    .unwrap();
    let mut targets = single_targets(&u);
    targets.extend(pairwise_targets(&u));
    out.push((u, cs, targets, DisparityConfig::default()));

    for (file, groups, fdr) in [
        ("faculty_match_rates.csv", ["cn", "de"], false),
        ("nofly_compas_rates.csv", ["African-American", "Caucasian"], true),
    ] {
        let rows = rate_rows(file);
        for pair in rows.chunks(2) {
            let (u, cs) =
                matcher_dataset(groups, (pair[0].protected, pair[0].other), (pair[1].protected, pair[1].other), fdr);
            let targets = single_targets(&u);
            out.push((u, cs, targets, DisparityConfig::table(DisparityOp::Div, 0.2)));
        }
    }

    let cfg = GenConfig::nofly(3, 40, 30);
    let source = synthetic_source(Recipe::NoFly, &[80, 60], 3);
    let data = generate_nofly(&cfg, &source).unwrap();
    let mut cs = data.pairs;
    for (i, c) in cs.iter_mut().enumerate() {
        // A deterministic, group-dependent scorer.
        let s = if c.truth.is_match() { 0.55 + (i % 5) as f64 * 0.1 } else { (i % 7) as f64 * 0.1 };
        c.score = Some(s);
        c.decision = Some(score_match(s, 0.5));
    }
    let mut targets = single_targets(&data.universe);
    targets.extend(pairwise_targets(&data.universe));
    out.push((data.universe, cs, targets, DisparityConfig::default()));
    out
}
