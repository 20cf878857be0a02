//! Sweep a score threshold and measure how stable the unfairness verdict is.
use emaudit::audit::{single_targets, DisparityConfig};
use emaudit::dataset::{Correspondence, Label};
use emaudit::groups::{AttributeKind, GroupUniverse, SensitiveAttribute};
use emaudit::measures::Measure;
use emaudit::report::{heatmap_csv, SweepDocument};
use emaudit::sensitivity::{default_thresholds, sweep, SensitivityNorm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = GroupUniverse::new(vec![SensitiveAttribute::new("grp", AttributeKind::Binary, &["A", "B"])])?;
    let (a, b) = (u.encode(["A"])?, u.encode(["B"])?);
    // group A's true matches score lower than group B's
    let mut cs = Vec::new();
    for i in 0..40 {
        let (g, s, truth) = match i % 4 {
            0 => (&a, 0.6, Label::Match),
            1 => (&b, 0.9, Label::Match),
            2 => (&a, 0.1, Label::NonMatch),
            _ => (&b, 0.1, Label::NonMatch),
        };
        cs.push(Correspondence {
            id_left: format!("l{i}"),
            id_right: format!("r{i}"),
            groups_left: g.clone(),
            groups_right: g.clone(),
            score: Some(s),
            decision: None,
            truth,
        });
    }
    let r = sweep(&u, &cs, &default_thresholds(), &single_targets(&u), Measure::TPRP, &DisparityConfig::default())?;
    for p in &r.points {
        println!("t={:.2} unfair={} {:?}", p.threshold, p.unfair_count, p.report.discriminated_labels());
    }
    let doc = SweepDocument::new("biased", &r, SensitivityNorm::L2)?;
    print!("{}", heatmap_csv(&[doc])?);
    Ok(())
}
