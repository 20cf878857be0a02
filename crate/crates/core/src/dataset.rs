//! Correspondence files, entity tables and the single/pairwise legitimacy
//! filters.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{GroupEncoding, GroupError, GroupUniverse};

pub const CORRESPONDENCE_HEADER: [&str; 7] =
    ["id_left", "id_right", "groups_left", "groups_right", "score", "prediction", "label"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {source}")]
    Group { line: u64, source: GroupError },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A matcher decision or a ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "M")]
    Match,
    #[serde(rename = "N")]
    NonMatch,
}

impl Label {
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "M" | "m" => Some(Label::Match),
            "N" | "n" => Some(Label::NonMatch),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Match => "M",
            Label::NonMatch => "N",
        }
    }

    pub fn is_match(self) -> bool {
        self == Label::Match
    }
}

/// One audited entity pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub id_left: String,
    pub id_right: String,
    pub groups_left: GroupEncoding,
    pub groups_right: GroupEncoding,
    /// Matcher confidence in `[0, 1]`.
    pub score: Option<f64>,
    pub decision: Option<Label>,
    pub truth: Label,
}

impl Correspondence {
    /// The same pair seen from the other side.
    pub fn swapped(&self) -> Correspondence {
        Correspondence {
            id_left: self.id_right.clone(),
            id_right: self.id_left.clone(),
            groups_left: self.groups_right.clone(),
            groups_right: self.groups_left.clone(),
            score: self.score,
            decision: self.decision,
            truth: self.truth,
        }
    }
}

/// What a single audit looks at: one (sub)group, or a pair of (sub)groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum AuditTarget {
    Single { group: GroupEncoding },
    Pairwise { pair: (GroupEncoding, GroupEncoding) },
}

impl AuditTarget {
    pub fn single(group: GroupEncoding) -> Self {
        AuditTarget::Single { group }
    }

    pub fn pairwise(a: GroupEncoding, b: GroupEncoding) -> Self {
        AuditTarget::Pairwise { pair: (a, b) }
    }

    pub fn mode(&self) -> AuditMode {
        match self {
            AuditTarget::Single { .. } => AuditMode::Single,
            AuditTarget::Pairwise { .. } => AuditMode::Pairwise,
        }
    }

    pub fn label(&self, universe: &GroupUniverse) -> String {
        match self {
            AuditTarget::Single { group } => universe.label(group),
            AuditTarget::Pairwise { pair } => {
                format!("{}~{}", universe.label(&pair.0), universe.label(&pair.1))
            }
        }
    }

    pub fn encodings(&self) -> Vec<&GroupEncoding> {
        match self {
            AuditTarget::Single { group } => vec![group],
            AuditTarget::Pairwise { pair } => vec![&pair.0, &pair.1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Single,
    Pairwise,
}

/// Parsing options for correspondence files.
#[derive(Debug, Clone)]
pub struct FormatConfig {
    pub delimiter: u8,
    pub group_separator: char,
    /// Reject rows carrying neither a score nor a prediction. Generated
    /// files waiting for a matcher run have neither.
    pub require_prediction: bool,
}

impl Default for FormatConfig {
    fn default() -> Self {
        FormatConfig { delimiter: b',', group_separator: '|', require_prediction: true }
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, DatasetError> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
}

fn parse_groups(universe: &GroupUniverse, cell: &str, sep: char, line: u64) -> Result<GroupEncoding, DatasetError> {
    let values = cell.split(sep).map(str::trim).filter(|v| !v.is_empty());
    let enc = universe.encode(values).map_err(|source| DatasetError::Group { line, source })?;
    universe.validate_entity(&enc).map_err(|source| DatasetError::Group { line, source })?;
    Ok(enc)
}

pub fn load_correspondences<R: Read>(
    source: R,
    universe: &GroupUniverse,
    format: &FormatConfig,
) -> Result<Vec<Correspondence>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().delimiter(format.delimiter).has_headers(true).from_reader(source);
    let headers = reader.headers()?.clone();
    let cols: Vec<usize> = CORRESPONDENCE_HEADER.iter().map(|name| column(&headers, name)).collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(cols[i]).unwrap_or("").trim();
        let parse_err = |reason: String| DatasetError::Parse { line, reason };

        let score = match cell(4) {
            "" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| parse_err(format!("invalid score `{s}`")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(parse_err(format!("score {v} outside [0, 1]")));
                }
                Some(v)
            }
        };
        let decision = match cell(5) {
            "" => None,
            s => Some(Label::parse(s).ok_or_else(|| parse_err(format!("invalid prediction `{s}`")))?),
        };
        let truth = match cell(6) {
            "" => return Err(parse_err("missing label".into())),
            s => Label::parse(s).ok_or_else(|| parse_err(format!("invalid label `{s}`")))?,
        };
        if format.require_prediction && score.is_none() && decision.is_none() {
            return Err(parse_err("row has neither a score nor a prediction".into()));
        }
        out.push(Correspondence {
            id_left: cell(0).to_string(),
            id_right: cell(1).to_string(),
            groups_left: parse_groups(universe, cell(2), format.group_separator, line)?,
            groups_right: parse_groups(universe, cell(3), format.group_separator, line)?,
            score,
            decision,
            truth,
        });
    }
    Ok(out)
}

pub fn write_correspondences<W: Write>(
    sink: W,
    universe: &GroupUniverse,
    cs: &[Correspondence],
) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CORRESPONDENCE_HEADER)?;
    for c in cs {
        let score = c.score.map(|s| s.to_string()).unwrap_or_default();
        writer.write_record([
            c.id_left.as_str(),
            c.id_right.as_str(),
            &universe.decode(&c.groups_left).join("|"),
            &universe.decode(&c.groups_right).join("|"),
            &score,
            c.decision.map_or("", Label::as_str),
            c.truth.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Whether `c` enters the single-fairness audit of `g`: either side belongs.
pub fn legitimate_single(c: &Correspondence, g: &GroupEncoding) -> Result<bool, GroupError> {
    Ok(g.contains(&c.groups_left)? || g.contains(&c.groups_right)?)
}

/// Whether `c` enters the pairwise audit of `(s, s')`, in either direction.
pub fn legitimate_pairwise(c: &Correspondence, pair: (&GroupEncoding, &GroupEncoding)) -> Result<bool, GroupError> {
    let (s, t) = pair;
    Ok((s.contains(&c.groups_left)? && t.contains(&c.groups_right)?)
        || (t.contains(&c.groups_left)? && s.contains(&c.groups_right)?))
}

/// An entity table: an `id` column followed by attribute columns.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntityTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A borrowed row of an [`EntityTable`].
#[derive(Debug, Clone, Copy)]
pub struct Record<'a> {
    columns: &'a [String],
    values: &'a [String],
}

impl<'a> Record<'a> {
    pub fn get(&self, name: &str) -> Option<&'a str> {
        self.columns.iter().position(|c| c == name).and_then(|i| self.values.get(i)).map(String::as_str)
    }

    pub fn id(&self) -> &'a str {
        self.values.first().map_or("", String::as_str)
    }
}

impl EntityTable {
    pub fn new(columns: Vec<String>) -> Self {
        EntityTable { columns, rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DatasetError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    }

    pub fn record(&self, row: usize) -> Record<'_> {
        Record { columns: &self.columns, values: &self.rows[row] }
    }

    pub fn records(&self) -> impl Iterator<Item = Record<'_>> {
        (0..self.rows.len()).map(|i| self.record(i))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row index by id (first column).
    pub fn id_index(&self) -> std::collections::HashMap<&str, usize> {
        self.rows.iter().enumerate().map(|(i, r)| (r[0].as_str(), i)).collect()
    }

    pub fn read<R: Read>(source: R) -> Result<Self, DatasetError> {
        let mut reader = csv::Reader::from_reader(source);
        let columns: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if columns.first().map(String::as_str) != Some("id") {
            return Err(DatasetError::MissingColumn("id".into()));
        }
        let mut table = EntityTable::new(columns);
        for record in reader.records() {
            table.rows.push(record?.iter().map(str::to_string).collect());
        }
        Ok(table)
    }

    pub fn write<W: Write>(&self, sink: W) -> Result<(), DatasetError> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Group encoding of a row from its sensitive column(s); multiple values
    /// in one cell are `|`-separated.
    pub fn groups_of(
        &self,
        row: usize,
        sensitive: &[String],
        universe: &GroupUniverse,
    ) -> Result<GroupEncoding, DatasetError> {
        let mut values = Vec::new();
        for col in sensitive {
            let i = self.column_index(col)?;
            values.extend(self.rows[row][i].split('|').map(str::trim).filter(|v| !v.is_empty()).map(str::to_string));
        }
        let line = row as u64 + 2;
        let enc = universe.encode(&values).map_err(|source| DatasetError::Group { line, source })?;
        universe.validate_entity(&enc).map_err(|source| DatasetError::Group { line, source })?;
        Ok(enc)
    }
}
