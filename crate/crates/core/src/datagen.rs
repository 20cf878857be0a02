//! Semi-synthetic social matching benchmarks.
//!
//! Two recipes are provided. `FacultyMatch` copies a sample of faculty
//! records, perturbs the copies' names and labels the Cartesian product by
//! scholar id, optionally thinning the non-matches that involve one group.
//! `NoFly` draws a passenger table and a watch-list table from the same
//! person source at different group ratios, perturbs the watch-list names and
//! labels the product by person id.
//!
//! All randomness comes from a seeded ChaCha8 stream, so outputs are a pure
//! function of the configuration and the source table.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Correspondence, DatasetError, EntityTable, Label};
use crate::groups::{AttributeKind, GroupError, GroupUniverse, SensitiveAttribute};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("missing column `{0}` in source table")]
    MissingColumn(String),
    #[error("group `{group}` needs {needed} source rows, only {available} available")]
    InsufficientSourceRows { group: String, needed: usize, available: usize },
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    FacultyMatch,
    #[serde(alias = "nofly-compas")]
    NoFly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonMatchDrop {
    pub group: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub recipe: Recipe,
    /// Column holding the sensitive group of each source row.
    pub group_column: String,
    /// Column whose equality defines a true match.
    pub id_column: String,
    /// Group values kept from the source, in universe order.
    pub groups: Vec<String>,
    /// Left sample size; `None` keeps every eligible row (FacultyMatch only).
    #[serde(default)]
    pub left_size: Option<usize>,
    #[serde(default)]
    pub right_size: Option<usize>,
    #[serde(default)]
    pub left_ratios: BTreeMap<String, f64>,
    #[serde(default)]
    pub right_ratios: BTreeMap<String, f64>,
    pub perturb_fields: Vec<String>,
    #[serde(default)]
    pub nonmatch_drop: Option<NonMatchDrop>,
}

impl GenConfig {
    pub fn faculty_match(seed: u64) -> Self {
        GenConfig {
            seed,
            recipe: Recipe::FacultyMatch,
            group_column: "country".into(),
            id_column: "scholarID".into(),
            groups: vec!["cn".into(), "de".into()],
            left_size: None,
            right_size: None,
            left_ratios: BTreeMap::new(),
            right_ratios: BTreeMap::new(),
            perturb_fields: vec!["fullName".into()],
            nonmatch_drop: Some(NonMatchDrop { group: "de".into(), fraction: 0.8 }),
        }
    }

    pub fn nofly(seed: u64, passengers: usize, watch_list: usize) -> Self {
        let ratios =
            |c: f64, a: f64| BTreeMap::from([("Caucasian".to_string(), c), ("African-American".to_string(), a)]);
        GenConfig {
            seed,
            recipe: Recipe::NoFly,
            group_column: "race".into(),
            id_column: "personID".into(),
            groups: vec!["Caucasian".into(), "African-American".into()],
            left_size: Some(passengers),
            right_size: Some(watch_list),
            left_ratios: ratios(0.8, 0.2),
            right_ratios: ratios(0.48, 0.52),
            perturb_fields: vec!["firstName".into(), "lastName".into()],
            nonmatch_drop: None,
        }
    }

    pub fn universe(&self) -> Result<GroupUniverse, GroupError> {
        let kind = if self.groups.len() == 2 { AttributeKind::Binary } else { AttributeKind::MultiExclusive };
        GroupUniverse::new(vec![SensitiveAttribute {
            name: self.group_column.clone(),
            kind,
            domain: self.groups.clone(),
        }])
    }

    fn validate(&self) -> Result<(), DatagenError> {
        if self.groups.is_empty() {
            return Err(DatagenError::Config("no groups configured".into()));
        }
        for (name, ratios) in [("left_ratios", &self.left_ratios), ("right_ratios", &self.right_ratios)] {
            if ratios.is_empty() {
                continue;
            }
            if let Some(g) = ratios.keys().find(|g| !self.groups.contains(g)) {
                return Err(DatagenError::Config(format!("{name} names unknown group `{g}`")));
            }
            if ratios.values().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(DatagenError::Config(format!("{name} fractions must lie in [0, 1]")));
            }
            let sum: f64 = ratios.values().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(DatagenError::Config(format!("{name} sum to {sum}, expected 1")));
            }
        }
        if let Some(d) = &self.nonmatch_drop {
            if !(0.0..=1.0).contains(&d.fraction) {
                return Err(DatagenError::Config("nonmatch_drop fraction must lie in [0, 1]".into()));
            }
            if !self.groups.contains(&d.group) {
                return Err(DatagenError::Config(format!("nonmatch_drop names unknown group `{}`", d.group)));
            }
        }
        Ok(())
    }
}

/// Applies one random edit: insert, delete or substitute a character.
///
/// The result is always at edit distance exactly 1 from `name`. Inserted and
/// substituted characters are lowercase ASCII letters; a substitute differs
/// from the character it replaces. An empty name can only grow.
pub fn perturb_name<R: Rng + ?Sized>(name: &str, rng: &mut R) -> String {
    let mut chars: Vec<char> = name.chars().collect();
    let op = if chars.is_empty() { 0 } else { rng.gen_range(0..3) };
    let letter = |rng: &mut R| (b'a' + rng.gen_range(0..26u8)) as char;
    match op {
        0 => {
            let pos = rng.gen_range(0..=chars.len());
            let c = letter(rng);
            chars.insert(pos, c);
        }
        1 => {
            let pos = rng.gen_range(0..chars.len());
            chars.remove(pos);
        }
        _ => {
            let pos = rng.gen_range(0..chars.len());
            let old = chars[pos];
            let mut c = letter(rng);
            while c == old {
                c = letter(rng);
            }
            chars[pos] = c;
        }
    }
    chars.into_iter().collect()
}

/// Splits `n` by `ratios` with the largest-remainder rule; quotas sum to `n`.
pub fn largest_remainder(n: usize, ratios: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        quotas[i] += 1;
    }
    quotas
}

/// Output of a generator run.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub universe: GroupUniverse,
    pub left: EntityTable,
    pub right: EntityTable,
    /// Labelled pairs with neither score nor prediction.
    pub pairs: Vec<Correspondence>,
}

/// Checks that every configured column exists and returns the group column.
fn group_column(cfg: &GenConfig, source: &EntityTable) -> Result<usize, DatagenError> {
    let find = |name: &str| {
        source.columns.iter().position(|c| c == name).ok_or_else(|| DatagenError::MissingColumn(name.to_string()))
    };
    find(&cfg.id_column)?;
    for f in &cfg.perturb_fields {
        find(f)?;
    }
    find(&cfg.group_column)
}

/// Source row indices per configured group, in source order.
fn pools(cfg: &GenConfig, source: &EntityTable, group_col: usize) -> Vec<Vec<usize>> {
    cfg.groups.iter().map(|g| (0..source.len()).filter(|&i| source.rows[i][group_col].trim() == g).collect()).collect()
}

/// Uniform sample without replacement at the configured ratios, returned in
/// source order.
fn sample_rows<R: Rng>(
    cfg: &GenConfig,
    pools: &[Vec<usize>],
    size: usize,
    ratios: &BTreeMap<String, f64>,
    rng: &mut R,
) -> Result<Vec<usize>, DatagenError> {
    let weights: Vec<f64> = cfg.groups.iter().map(|g| ratios.get(g).copied().unwrap_or(0.0)).collect();
    let quotas = largest_remainder(size, &weights);
    let mut rows = Vec::with_capacity(size);
    for ((group, pool), quota) in cfg.groups.iter().zip(pools).zip(quotas) {
        if quota > pool.len() {
            return Err(DatagenError::InsufficientSourceRows {
                group: group.clone(),
                needed: quota,
                available: pool.len(),
            });
        }
        rows.extend(index::sample(rng, pool.len(), quota).into_iter().map(|i| pool[i]));
    }
    rows.sort_unstable();
    Ok(rows)
}

fn build_table(source: &EntityTable, rows: &[usize], prefix: &str) -> EntityTable {
    let mut columns = vec!["id".to_string()];
    columns.extend(source.columns.iter().filter(|c| c.as_str() != "id").cloned());
    let keep: Vec<usize> = (0..source.columns.len()).filter(|&i| source.columns[i] != "id").collect();
    let mut table = EntityTable::new(columns);
    for (n, &r) in rows.iter().enumerate() {
        let mut row = vec![format!("{prefix}{n}")];
        row.extend(keep.iter().map(|&i| source.rows[r][i].clone()));
        table.rows.push(row);
    }
    table
}

fn perturb_table<R: Rng>(table: &mut EntityTable, fields: &[String], rng: &mut R) {
    let cols: Vec<usize> = fields.iter().filter_map(|f| table.columns.iter().position(|c| c == f)).collect();
    for row in &mut table.rows {
        for &c in &cols {
            row[c] = perturb_name(&row[c], rng);
        }
    }
}

fn cartesian(
    universe: &GroupUniverse,
    left: &EntityTable,
    right: &EntityTable,
    group_column: &str,
    id_column: &str,
) -> Result<Vec<Correspondence>, DatagenError> {
    let sensitive = [group_column.to_string()];
    let lg = (0..left.len()).map(|i| left.groups_of(i, &sensitive, universe)).collect::<Result<Vec<_>, _>>()?;
    let rg = (0..right.len()).map(|i| right.groups_of(i, &sensitive, universe)).collect::<Result<Vec<_>, _>>()?;
    let lid = left.column_index(id_column)?;
    let rid = right.column_index(id_column)?;
    let mut pairs = Vec::with_capacity(left.len() * right.len());
    for (i, lrow) in left.rows.iter().enumerate() {
        for (j, rrow) in right.rows.iter().enumerate() {
            let truth = if lrow[lid] == rrow[rid] { Label::Match } else { Label::NonMatch };
            pairs.push(Correspondence {
                id_left: lrow[0].clone(),
                id_right: rrow[0].clone(),
                groups_left: lg[i].clone(),
                groups_right: rg[j].clone(),
                score: None,
                decision: None,
                truth,
            });
        }
    }
    Ok(pairs)
}

/// Removes exactly `round(fraction * k)` of the `k` non-match pairs that have
/// `group` on either side, chosen uniformly.
fn drop_nonmatches<R: Rng>(
    universe: &GroupUniverse,
    pairs: Vec<Correspondence>,
    drop: &NonMatchDrop,
    rng: &mut R,
) -> Result<Vec<Correspondence>, DatagenError> {
    let g = universe.encode([drop.group.as_str()])?;
    let eligible: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            c.truth == Label::NonMatch && (g.is_subset_of(&c.groups_left) || g.is_subset_of(&c.groups_right))
        })
        .map(|(i, _)| i)
        .collect();
    let k = (drop.fraction * eligible.len() as f64).round() as usize;
    let mut doomed = vec![false; pairs.len()];
    for i in index::sample(rng, eligible.len(), k) {
        doomed[eligible[i]] = true;
    }
    Ok(pairs.into_iter().zip(doomed).filter_map(|(c, d)| (!d).then_some(c)).collect())
}

pub fn generate(cfg: &GenConfig, source: &EntityTable) -> Result<GeneratedDataset, DatagenError> {
    match cfg.recipe {
        Recipe::FacultyMatch => generate_faculty_match(cfg, source),
        Recipe::NoFly => generate_nofly(cfg, source),
    }
}

pub fn generate_faculty_match(cfg: &GenConfig, source: &EntityTable) -> Result<GeneratedDataset, DatagenError> {
    cfg.validate()?;
    let group_col = group_column(cfg, source)?;
    let universe = cfg.universe()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pools = pools(cfg, source, group_col);
    let rows = match (cfg.left_size, cfg.left_ratios.is_empty()) {
        (Some(n), false) => sample_rows(cfg, &pools, n, &cfg.left_ratios, &mut rng)?,
        (Some(_), true) => {
            return Err(DatagenError::Config("left_size requires left_ratios".into()));
        }
        (None, _) => {
            let mut all: Vec<usize> = pools.concat();
            all.sort_unstable();
            all
        }
    };
    let left = build_table(source, &rows, "L");
    let mut right = build_table(source, &rows, "R");
    perturb_table(&mut right, &cfg.perturb_fields, &mut rng);
    let mut pairs = cartesian(&universe, &left, &right, &cfg.group_column, &cfg.id_column)?;
    if let Some(drop) = &cfg.nonmatch_drop {
        pairs = drop_nonmatches(&universe, pairs, drop, &mut rng)?;
    }
    Ok(GeneratedDataset { universe, left, right, pairs })
}

/// Samples the passenger (left) and watch-list (right) tables and perturbs
/// the watch-list name fields, without building pairs.
pub fn nofly_tables(cfg: &GenConfig, source: &EntityTable) -> Result<(EntityTable, EntityTable), DatagenError> {
    cfg.validate()?;
    let group_col = group_column(cfg, source)?;
    let (Some(nl), Some(nr)) = (cfg.left_size, cfg.right_size) else {
        return Err(DatagenError::Config("NoFly needs left_size and right_size".into()));
    };
    if cfg.left_ratios.is_empty() || cfg.right_ratios.is_empty() {
        return Err(DatagenError::Config("NoFly needs left_ratios and right_ratios".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pools = pools(cfg, source, group_col);
    let left_rows = sample_rows(cfg, &pools, nl, &cfg.left_ratios, &mut rng)?;
    let right_rows = sample_rows(cfg, &pools, nr, &cfg.right_ratios, &mut rng)?;
    let left = build_table(source, &left_rows, "P");
    let mut right = build_table(source, &right_rows, "W");
    perturb_table(&mut right, &cfg.perturb_fields, &mut rng);
    Ok((left, right))
}

pub fn generate_nofly(cfg: &GenConfig, source: &EntityTable) -> Result<GeneratedDataset, DatagenError> {
    let (left, right) = nofly_tables(cfg, source)?;
    let universe = cfg.universe()?;
    let mut pairs = cartesian(&universe, &left, &right, &cfg.group_column, &cfg.id_column)?;
    if let Some(drop) = &cfg.nonmatch_drop {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        pairs = drop_nonmatches(&universe, pairs, drop, &mut rng)?;
    }
    Ok(GeneratedDataset { universe, left, right, pairs })
}

const GIVEN: [&[&str]; 2] = [
    &["James", "Mary", "John", "Linda", "Robert", "Susan", "Michael", "Karen", "David", "Lisa", "Thomas", "Nancy"],
    &[
        "Andre", "Keisha", "Marcus", "Tanya", "Darnell", "Latoya", "Jamal", "Ebony", "Tyrone", "Aaliyah", "DeShawn",
        "Imani",
    ],
];
const FAMILY: [&[&str]; 2] = [
    &[
        "Miller", "Anderson", "Wilson", "Taylor", "Moore", "Martin", "Thompson", "Clark", "Lewis", "Walker", "Hall",
        "Young",
    ],
    &[
        "Brown",
        "Jackson",
        "Williams",
        "Johnson",
        "Davis",
        "Harris",
        "Robinson",
        "Washington",
        "Jefferson",
        "Banks",
        "Brooks",
        "Coleman",
    ],
];
const SYLLABLES: [&[&str]; 2] = [
    &["Li", "Wei", "Qing", "Ming", "Lin", "Xiao", "Jun", "Hui", "Yan", "Hong", "Jie", "Ping"],
    &["Hans", "Klaus", "Jurgen", "Uwe", "Dieter", "Stefan", "Wolf", "Gerd", "Bernd", "Rolf", "Horst", "Ute"],
];
const SURNAMES: [&[&str]; 2] = [
    &["Wang", "Li", "Zhang", "Liu", "Chen", "Yang", "Huang", "Zhao", "Wu", "Zhou", "Xu", "Sun"],
    &[
        "Muller",
        "Schmidt",
        "Schneider",
        "Fischer",
        "Weber",
        "Meyer",
        "Wagner",
        "Becker",
        "Schulz",
        "Hoffmann",
        "Koch",
        "Richter",
    ],
];

/// A synthetic stand-in source table for a recipe.
///
/// `counts` gives the number of rows per group, in the order of the recipe's
/// default groups (`cn, de` or `Caucasian, African-American`). Names are
/// drawn from small per-group pools, so near-duplicate names across distinct
/// people occur naturally.
pub fn synthetic_source(recipe: Recipe, counts: &[usize], seed: u64) -> EntityTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, pool: &[&str]| pool[rng.gen_range(0..pool.len())].to_string();
    match recipe {
        Recipe::FacultyMatch => {
            let groups = ["cn", "de"];
            let mut t = EntityTable::new(vec!["id".into(), "fullName".into(), "country".into(), "scholarID".into()]);
            let mut n = 0;
            for (gi, &count) in counts.iter().enumerate().take(2) {
                for _ in 0..count {
                    let given = if gi == 0 {
                        format!("{}{}", pick(&mut rng, SYLLABLES[0]), pick(&mut rng, SYLLABLES[0]).to_lowercase())
                    } else {
                        pick(&mut rng, SYLLABLES[1])
                    };
                    let name = format!("{given} {}", pick(&mut rng, SURNAMES[gi]));
                    t.rows.push(vec![format!("s{n}"), name, groups[gi].into(), format!("sch{n:06}")]);
                    n += 1;
                }
            }
            t
        }
        Recipe::NoFly => {
            let groups = ["Caucasian", "African-American"];
            let mut t = EntityTable::new(vec![
                "id".into(),
                "firstName".into(),
                "lastName".into(),
                "race".into(),
                "personID".into(),
            ]);
            let mut n = 0;
            for (gi, &count) in counts.iter().enumerate().take(2) {
                for _ in 0..count {
                    t.rows.push(vec![
                        format!("p{n}"),
                        pick(&mut rng, GIVEN[gi]),
                        pick(&mut rng, FAMILY[gi]),
                        groups[gi].into(),
                        format!("pid{n:06}"),
                    ]);
                    n += 1;
                }
            }
            t
        }
    }
}
