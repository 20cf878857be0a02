mod common;

use common::{audit_fixtures, instance_strategy, Instance};
use emaudit::audit::{run_audit, AuditReport, DisparityConfig};
use emaudit::confusion::{rates, ConfusionMatrix};
use emaudit::dataset::{AuditTarget, Correspondence};
use emaudit::groups::GroupUniverse;
use emaudit::measures::Measure;
use emaudit::report::report_json;
use emaudit::sensitivity::{sensitivity_l2, sweep};
use proptest::prelude::*;

fn swapped(cs: &[Correspondence]) -> Vec<Correspondence> {
    cs.iter().map(Correspondence::swapped).collect()
}

fn audit_json(u: &GroupUniverse, cs: &[Correspondence], targets: &[AuditTarget], cfg: &DisparityConfig) -> String {
    report_json(&run_audit(u, cs, targets, &Measure::ALL, cfg).unwrap()).unwrap()
}

/// EO is flagged exactly when a component is, wherever EO applies. For a
/// disjoint group pair EO is void while FPRP is still judged on its own.
fn eo_is_or(report: &AuditReport) -> bool {
    (0..report.targets.len()).all(|i| {
        let eo = report.record(i, Measure::EO).unwrap();
        let flag = |m| report.record(i, m).unwrap().unfair;
        if eo.applicable {
            eo.unfair == (flag(Measure::TPRP) || flag(Measure::FPRP))
        } else {
            !eo.unfair
        }
    })
}

#[test]
fn swap_symmetry_on_audit_fixtures() {
    for (u, cs, targets, cfg) in audit_fixtures() {
        assert_eq!(audit_json(&u, &cs, &targets, &cfg), audit_json(&u, &swapped(&cs), &targets, &cfg));
    }
}

#[test]
fn eo_flag_is_component_or_on_audit_fixtures() {
    for (u, cs, targets, cfg) in audit_fixtures() {
        let r = run_audit(&u, &cs, &targets, &Measure::ALL, &cfg).unwrap();
        assert!(eo_is_or(&r));
    }
}

#[test]
fn sensitivity_example() {
    assert!((sensitivity_l2(&[0, 2, 2, 0]).unwrap() - 2.828).abs() < 1e-3);
    assert!((sensitivity_l2(&[0, 2, 2, 0]).unwrap() - 8f64.sqrt()).abs() < 1e-9);
}

fn matrix() -> impl Strategy<Value = ConfusionMatrix> {
    (0u64..1000, 0u64..1000, 0u64..1000, 0u64..1000).prop_map(|(tp, fp, fn_, tn)| ConfusionMatrix::new(tp, fp, fn_, tn))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn swap_symmetry(inst in instance_strategy(6, 80)) {
        let Instance { universe, cs, cfg, targets } = inst;
        prop_assert_eq!(
            audit_json(&universe, &cs, &targets, &cfg),
            audit_json(&universe, &swapped(&cs), &targets, &cfg)
        );
    }

    #[test]
    fn eo_flag_is_component_or(inst in instance_strategy(6, 80)) {
        let r = run_audit(&inst.universe, &inst.cs, &inst.targets, &Measure::ALL, &inst.cfg).unwrap();
        prop_assert!(eo_is_or(&r));
    }

    #[test]
    fn counts_shrink_as_threshold_rises(
        inst in instance_strategy(6, 120),
        grid in prop::collection::btree_set(0u32..=100, 2..8),
    ) {
        let thresholds: Vec<f64> = grid.into_iter().map(|t| t as f64 / 100.0).collect();
        let r = sweep(&inst.universe, &inst.cs, &thresholds, &inst.targets, Measure::TPRP, &inst.cfg).unwrap();
        prop_assert!(r.counts_monotone());
        for w in r.points.windows(2) {
            let (a, b) = (&w[0].report.overall_matrix, &w[1].report.overall_matrix);
            prop_assert!(b.tp <= a.tp && b.fp <= a.fp);
        }
    }

    #[test]
    fn sensitivity_is_l2_of_differences(counts in prop::collection::vec(0usize..50, 2..20)) {
        let s = sensitivity_l2(&counts).unwrap();
        let expected = counts.windows(2).map(|w| (w[1] as f64 - w[0] as f64).powi(2)).sum::<f64>().sqrt();
        prop_assert!((s - expected).abs() < 1e-9);
        let flat = vec![counts[0]; counts.len()];
        prop_assert_eq!(sensitivity_l2(&flat).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn measure_complements(m in matrix()) {
        let r = rates(&m);
        for (a, b) in [(r.tpr, r.fnr), (r.ppv, r.fdr), (r.npv, r.forr), (r.tnr, r.fpr)] {
            prop_assert_eq!(a.is_some(), b.is_some());
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!((a + b - 1.0).abs() < 1e-12);
            }
        }
    }
}
