//! Sensitive attributes, group universes and binary group encodings.
//!
//! Every group value of every sensitive attribute gets one bit in a fixed
//! order: attributes in declaration order, then each attribute's domain in
//! declaration order. An entity is encoded by setting the bits of the groups
//! it belongs to; a subgroup is encoded the same way, and an entity belongs to
//! a subgroup when `subgroup & entity == subgroup`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unknown group value `{0}`")]
    UnknownGroupValue(String),
    #[error("group value `{0}` is declared more than once in the universe")]
    DuplicateGroupValue(String),
    #[error("attribute `{0}` has an empty domain or an empty value")]
    EmptyDomain(String),
    #[error("binary attribute `{name}` must have exactly 2 values, found {found}")]
    NotBinary { name: String, found: usize },
    #[error("encoding length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("entity must hold exactly one value of attribute `{attribute}`, found {found}")]
    ExclusiveViolation { attribute: String, found: usize },
}

/// How an attribute's values relate to a single entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttributeKind {
    Binary,
    #[serde(alias = "exclusive")]
    MultiExclusive,
    Setwise,
}

impl AttributeKind {
    pub fn is_exclusive(self) -> bool {
        !matches!(self, AttributeKind::Setwise)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitiveAttribute {
    pub name: String,
    pub kind: AttributeKind,
    pub domain: Vec<String>,
}

impl SensitiveAttribute {
    pub fn new<S: Into<String>>(name: S, kind: AttributeKind, domain: &[&str]) -> Self {
        SensitiveAttribute { name: name.into(), kind, domain: domain.iter().map(|s| s.to_string()).collect() }
    }
}

/// One flattened group: the attribute it comes from and its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatGroup {
    pub attribute: usize,
    pub value: String,
}

/// The ordered set of all level-1 groups across every sensitive attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupUniverse {
    attributes: Vec<SensitiveAttribute>,
    flattened: Vec<FlatGroup>,
    index: HashMap<String, usize>,
}

impl GroupUniverse {
    pub fn new(attributes: Vec<SensitiveAttribute>) -> Result<Self, GroupError> {
        let mut flattened = Vec::new();
        let mut index = HashMap::new();
        for (ai, attr) in attributes.iter().enumerate() {
            if attr.domain.is_empty() || attr.domain.iter().any(|v| v.is_empty()) {
                return Err(GroupError::EmptyDomain(attr.name.clone()));
            }
            if attr.kind == AttributeKind::Binary && attr.domain.len() != 2 {
                return Err(GroupError::NotBinary { name: attr.name.clone(), found: attr.domain.len() });
            }
            for value in &attr.domain {
                if index.insert(value.clone(), flattened.len()).is_some() {
                    return Err(GroupError::DuplicateGroupValue(value.clone()));
                }
                flattened.push(FlatGroup { attribute: ai, value: value.clone() });
            }
        }
        Ok(GroupUniverse { attributes, flattened, index })
    }

    /// Number of level-1 groups (`m`).
    pub fn size(&self) -> usize {
        self.flattened.len()
    }

    pub fn attributes(&self) -> &[SensitiveAttribute] {
        &self.attributes
    }

    pub fn flattened(&self) -> &[FlatGroup] {
        &self.flattened
    }

    pub fn position(&self, value: &str) -> Option<usize> {
        self.index.get(value).copied()
    }

    pub fn attribute_of(&self, bit: usize) -> &SensitiveAttribute {
        &self.attributes[self.flattened[bit].attribute]
    }

    pub fn encode<I, S>(&self, memberships: I) -> Result<GroupEncoding, GroupError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        encode_groups(self, memberships)
    }

    /// Group value names of the set bits, in flattened order.
    pub fn decode(&self, enc: &GroupEncoding) -> Vec<&str> {
        enc.ones().map(|i| self.flattened[i].value.as_str()).collect()
    }

    /// Human-readable label such as `Female&Pop`.
    pub fn label(&self, enc: &GroupEncoding) -> String {
        let names = self.decode(enc);
        if names.is_empty() {
            "*".to_string()
        } else {
            names.join("&")
        }
    }

    /// Checks that an entity encoding holds exactly one value of every
    /// binary or multi-exclusive attribute.
    pub fn validate_entity(&self, enc: &GroupEncoding) -> Result<(), GroupError> {
        self.check_len(enc)?;
        for (ai, attr) in self.attributes.iter().enumerate() {
            if !attr.kind.is_exclusive() {
                continue;
            }
            let found = enc.ones().filter(|&i| self.flattened[i].attribute == ai).count();
            if found != 1 {
                return Err(GroupError::ExclusiveViolation { attribute: attr.name.clone(), found });
            }
        }
        Ok(())
    }

    /// True when `enc` is a single group of a binary or multi-exclusive
    /// attribute, i.e. its complement is the union of the sibling values.
    pub fn is_exclusive_singleton(&self, enc: &GroupEncoding) -> bool {
        enc.len() == self.size()
            && enc.count_ones() == 1
            && enc.ones().next().is_some_and(|i| self.attribute_of(i).kind.is_exclusive())
    }

    pub fn check_len(&self, enc: &GroupEncoding) -> Result<(), GroupError> {
        if enc.len() != self.size() {
            return Err(GroupError::LengthMismatch { left: enc.len(), right: self.size() });
        }
        Ok(())
    }
}

/// Fixed-width bit vector over the flattened groups of a universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupEncoding {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl GroupEncoding {
    pub fn zeros(len: usize) -> Self {
        GroupEncoding { len, words: SmallVec::from_elem(0, len.div_ceil(64)) }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut enc = GroupEncoding::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                enc.set(i);
            }
        }
        enc
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Whether the two encodings have any set bit in common.
    pub fn intersects(&self, other: &GroupEncoding) -> bool {
        self.words.iter().zip(other.words.iter()).any(|(a, b)| a & b != 0)
    }

    /// `self & entity == self`, without the length check.
    #[inline]
    pub(crate) fn is_subset_of(&self, entity: &GroupEncoding) -> bool {
        self.words.iter().zip(entity.words.iter()).all(|(s, e)| s & e == *s)
    }

    /// Whether `entity` belongs to this subgroup.
    pub fn contains(&self, entity: &GroupEncoding) -> Result<bool, GroupError> {
        subgroup_contains(self, entity)
    }
}

impl fmt::Debug for GroupEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{self}>")
    }
}

impl fmt::Display for GroupEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for GroupEncoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}` in encoding `{s}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupEncoding::from_bits(&bits))
    }
}

impl Serialize for GroupEncoding {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupEncoding {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn encode_groups<I, S>(universe: &GroupUniverse, memberships: I) -> Result<GroupEncoding, GroupError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut enc = GroupEncoding::zeros(universe.size());
    for m in memberships {
        let m = m.as_ref();
        let pos = universe.position(m).ok_or_else(|| GroupError::UnknownGroupValue(m.to_string()))?;
        enc.set(pos);
    }
    Ok(enc)
}

pub fn subgroup_contains(subgroup: &GroupEncoding, entity: &GroupEncoding) -> Result<bool, GroupError> {
    if subgroup.len() != entity.len() {
        return Err(GroupError::LengthMismatch { left: subgroup.len(), right: entity.len() });
    }
    Ok(subgroup.is_subset_of(entity))
}

/// Enumerates the level-`k` subgroups of the intersectional hierarchy.
///
/// A level-`k` subgroup is a set of `k` groups that takes at most one value
/// from each binary or multi-exclusive attribute. For `k >= 2` the set must
/// span at least two attributes, so a setwise attribute contributes `k - 1`
/// values next to a value from another attribute. Passing
/// `include_pure_setwise` additionally admits `k` values all drawn from a
/// single setwise attribute. Results are ordered lexicographically by the
/// flattened bit positions.
pub fn enumerate_level_k_subgroups(
    universe: &GroupUniverse,
    k: usize,
    include_pure_setwise: bool,
) -> Vec<GroupEncoding> {
    let m = universe.size();
    let mut out = Vec::new();
    if k == 0 || k > m {
        return out;
    }
    let mut chosen = Vec::with_capacity(k);
    combine(universe, k, include_pure_setwise, 0, &mut chosen, &mut out);
    out
}

fn combine(
    universe: &GroupUniverse,
    k: usize,
    include_pure_setwise: bool,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<GroupEncoding>,
) {
    if chosen.len() == k {
        let attrs: BTreeSet<usize> = chosen.iter().map(|&i| universe.flattened[i].attribute).collect();
        if k >= 2 && attrs.len() < 2 && !include_pure_setwise {
            return;
        }
        let mut enc = GroupEncoding::zeros(universe.size());
        for &i in chosen.iter() {
            enc.set(i);
        }
        out.push(enc);
        return;
    }
    let remaining = k - chosen.len();
    for i in start..=universe.size() - remaining {
        let attr = universe.flattened[i].attribute;
        let exclusive = universe.attributes[attr].kind.is_exclusive();
        if exclusive && chosen.iter().any(|&j| universe.flattened[j].attribute == attr) {
            continue;
        }
        chosen.push(i);
        combine(universe, k, include_pure_setwise, i + 1, chosen, out);
        chosen.pop();
    }
}
