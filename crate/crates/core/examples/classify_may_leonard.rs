//! Structural classification of May-Leonard systems across the θ = 0 surface.

use stochastic_lv::classify3d::{classify, ClassifyBudget};
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    for (a, b) in [(0.8, 1.3), (0.9, 1.1), (0.5, 0.7), (1.2, 0.9)] {
        let r = classify(&presets::may_leonard(a, b, 0.0), &ClassifyBudget::default())?;
        println!("α={a} β={b}: θ = {:+.4}, {:?}", r.theta, r.category);
        for c in &r.certificates {
            println!("    {c}");
        }
    }
    Ok(())
}
