//! Generate a small semi-synthetic passenger / watch-list benchmark.
use emaudit::datagen::{generate, synthetic_source, GenConfig, Recipe};
use emaudit::dataset::write_correspondences;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = synthetic_source(Recipe::NoFly, &[120, 60], 1);
    let data = generate(&GenConfig::nofly(42, 10, 5), &source)?;
    let mut out = std::io::stdout().lock();
    data.left.write(&mut out)?;
    data.right.write(&mut out)?;
    write_correspondences(&mut out, &data.universe, &data.pairs[..10])?;
    Ok(())
}
