//! Stationary measure of Example 4.1: support on the ray L(P) and the radial
//! law.

use stochastic_lv::experiments::{deterministic_limit, ray_check};
use stochastic_lv::measures::{empirical_time_average, SamplingOptions};
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    let system = presets::example_4_1(0.5);
    let y0 = [0.2, 0.3, 0.1];
    let m = empirical_time_average(&system, &y0, 200.0, 20, 40.0, &SamplingOptions::default())?;
    let anchor = deterministic_limit(&system, &y0, 200.0)?;
    let rc = ray_check(&system, &m, &anchor, 1e-3)?;
    println!("{} samples, mean {:.4?}", m.len(), m.mean());
    println!("ray mass {:.4}, radial KS {:.4}", rc.ray.mass, rc.radial_ks);
    Ok(())
}
