//! Audit four predicted pairs in single and pairwise mode and print the grids.
use emaudit::audit::{pairwise_targets, run_audit, single_targets, DisparityConfig};
use emaudit::dataset::{load_correspondences, FormatConfig};
use emaudit::groups::{AttributeKind, GroupUniverse, SensitiveAttribute};
use emaudit::measures::Measure;
use emaudit::report::render_grid;

const PAIRS: &str = "\
id_left,id_right,groups_left,groups_right,score,prediction,label
e1,e2,g1,g1,,M,N
e3,e4,g2,g1,,N,N
e1,e4,g1,g1,,M,M
e2,e3,g1,g2,,N,M
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = GroupUniverse::new(vec![SensitiveAttribute::new("grp", AttributeKind::Binary, &["g1", "g2"])])?;
    let cs = load_correspondences(PAIRS.as_bytes(), &u, &FormatConfig::default())?;
    let cfg = DisparityConfig::default();
    for targets in [single_targets(&u), pairwise_targets(&u)] {
        let r = run_audit(&u, &cs, &targets, &Measure::ALL, &cfg)?;
        for t in &r.targets {
            println!("{:<8} {:?}", t.label, t.matrix);
        }
        println!("{}", render_grid(&r));
    }
    Ok(())
}
