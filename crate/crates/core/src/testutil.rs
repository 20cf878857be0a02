//! Shared fixtures for unit tests.

use crate::dataset::{Correspondence, Label};
use crate::groups::{AttributeKind, GroupUniverse, SensitiveAttribute};

/// The four-row worked example: two groups, one row per outcome.
pub fn worked_example() -> (GroupUniverse, Vec<Correspondence>) {
    let u = GroupUniverse::new(vec![SensitiveAttribute::new("grp", AttributeKind::Binary, &["g1", "g2"])]).unwrap();
    let row = |l: &str, r: &str, gl: &str, gr: &str, h: Label, y: Label| Correspondence {
        id_left: l.into(),
        id_right: r.into(),
        groups_left: u.encode([gl]).unwrap(),
        groups_right: u.encode([gr]).unwrap(),
        score: None,
        decision: Some(h),
        truth: y,
    };
    use Label::{Match as M, NonMatch as N};
    let cs = vec![
        row("e1", "e2", "g1", "g1", M, N),
        row("e3", "e4", "g2", "g1", N, N),
        row("e1", "e4", "g1", "g1", M, M),
        row("e2", "e3", "g1", "g2", N, M),
    ];
    (u, cs)
}
