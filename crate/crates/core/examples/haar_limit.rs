//! Phase marginal of Example 4.3 on a cone surface as σ decreases.

use stochastic_lv::experiments::median;
use stochastic_lv::measures::{sigma_sweep, OrbitParam, SamplingOptions, SweepOptions, SweepTarget};
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    let system = presets::example_4_3(0.2);
    let orbit = OrbitParam::trace(&system, &[0.3, 0.25, 0.45], 1e-3, 50.0, 300.0)?;
    println!("orbit period {:.4}", orbit.period);
    let start = orbit.origin().to_vec();
    let target = SweepTarget::ClosedOrbit(orbit);
    let sigmas = [0.4, 0.2, 0.1, 0.05];
    let mut ks = vec![Vec::new(); sigmas.len()];
    for rep in 0..10 {
        let opts = SweepOptions {
            horizon: 30.0,
            burn_in: Some(10.0),
            path_count: 1,
            sampling: SamplingOptions {
                sample_interval: 0.05,
                seed: rep,
                ..Default::default()
            },
        };
        for (k, row) in sigma_sweep(&system, &start, &sigmas, &target, &opts)?.iter().enumerate() {
            ks[k].push(row.phase_ks.unwrap_or(f64::NAN));
        }
    }
    for (s, v) in sigmas.iter().zip(&mut ks) {
        println!("σ = {s:<5} median phase KS {:.4}", median(v));
    }
    Ok(())
}
