//! Decomposition formula against direct Milstein and Euler integration on
//! shared, refined Brownian paths.

use stochastic_lv::experiments::{decompose_check, DecomposeCheckOptions};
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    let system = presets::may_leonard(0.8, 1.3, 0.3);
    let opts = DecomposeCheckOptions {
        seed: 1,
        ensemble: 32,
        ..Default::default()
    };
    let r = decompose_check(&system, &[0.5, 0.3, 0.2], &opts)?;
    for l in &r.levels {
        println!("step {:.2e}: vs milstein {:.3e}, vs euler {:.3e}", l.step, l.milstein_deviation, l.euler_deviation);
    }
    println!("ratios milstein {:.3?} euler {:.3?}", r.milstein_ratios, r.euler_ratios);
    Ok(())
}
