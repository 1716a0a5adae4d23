//! Pull-back trajectories of Example 4.1 converge to u(ω)·P.

use stochastic_lv::experiments::{pullback_convergence, PullbackOptions};
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    let opts = PullbackOptions {
        seeds: 5,
        times: vec![10.0, 25.0, 50.0, 100.0, 200.0],
        ..Default::default()
    };
    let r = pullback_convergence(&presets::example_4_1(0.5), &[0.2, 0.3, 0.1], &opts)?;
    println!("P = {:.4?}", r.limit);
    for row in &r.rows {
        let d: Vec<String> = row.distances.iter().map(|d| format!("{d:.2e}")).collect();
        println!("u = {:.4}: {}", row.u, d.join(" "));
    }
    Ok(())
}
