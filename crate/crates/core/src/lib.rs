//! Group-fairness auditing for entity matching.
//!
//! - [`groups`]: sensitive attributes, bitset group encodings, subgroup containment.
//! - [`dataset`]: correspondences and entity tables, CSV in and out.
//! - [`confusion`]: per-group confusion matrices in single and pairwise mode.
//! - [`measures`]: the eleven fairness measures over exact rationals.
//! - [`audit`]: disparities against a baseline and the unfair verdicts.
//! - [`matchers`]: similarity features, DNF rules and a weighted scorer.
//! - [`sensitivity`]: threshold sweeps and stability of the verdict.
//! - [`datagen`]: seeded semi-synthetic benchmark generation.
//! - [`config`], [`report`], [`cli`]: the `emaudit` command line.
//!
//! Runnable walkthroughs live in `examples/` (`cargo run --example worked_example_audit`).

pub mod audit;
pub mod cli;
pub mod config;
pub mod confusion;
pub mod datagen;
pub mod dataset;
pub mod groups;
pub mod matchers;
pub mod measures;
pub mod report;
pub mod sensitivity;

#[cfg(test)]
mod testutil;
