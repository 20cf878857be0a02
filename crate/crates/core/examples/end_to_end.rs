//! Generate, score, threshold and audit in-process, printing the verdict grid.
use emaudit::audit::{run_audit, single_targets, DisparityConfig};
use emaudit::datagen::{generate, synthetic_source, GenConfig, Recipe};
use emaudit::matchers::similarity::Feature;
use emaudit::matchers::{apply_threshold, score_correspondences, Scorer, WeightedFeature};
use emaudit::measures::Measure;
use emaudit::report::render_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = synthetic_source(Recipe::NoFly, &[120, 60], 1);
    let data = generate(&GenConfig::nofly(2024, 100, 50), &source)?;
    let scorer = Scorer::new(
        ["firstName", "lastName"]
            .map(|a| WeightedFeature { attribute: a.into(), feature: Feature::Levenshtein, weight: 1.0 })
            .to_vec(),
    )?;
    let mut cs = score_correspondences(&data.left, &data.right, &data.pairs, &scorer)?;
    apply_threshold(&mut cs, 0.5)?;
    let r =
        run_audit(&data.universe, &cs, &single_targets(&data.universe), &Measure::ALL, &DisparityConfig::default())?;
    println!("{} pairs, overall {:?}", cs.len(), r.overall_matrix);
    print!("{}", render_grid(&r));
    Ok(())
}
