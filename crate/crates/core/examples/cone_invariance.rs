//! The conserved cone quantity of Example 4.3 along deterministic and
//! decomposed stochastic trajectories.

use stochastic_lv::classify3d::cone_params;
use stochastic_lv::decomposition::decomposed_trajectory;
use stochastic_lv::lv::integrate_ode;
use stochastic_lv::paths::BrownianPath;
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    let y0 = [0.3, 0.25, 0.45];
    let cone = cone_params(&presets::example_4_3(0.0))?;
    println!("exponents ({:.3}, {:.3}, {:.3}), D = {:.3}", cone.mu, cone.nu, cone.omega_exp, cone.d);
    let v0 = cone.value(&y0);
    let drift = |v: f64| ((v - v0) / v0).abs();
    let det = integrate_ode(&presets::example_4_3(0.0), &y0, 50.0, 1e-3)?;
    let path = BrownianPath::sample(4, 0.0, 50.0, 1e-3)?;
    let sto = decomposed_trajectory(&presets::example_4_3(0.2), &path, &y0, 1.0, 50.0)?;
    let worst = |t: &stochastic_lv::Trajectory| t.states().map(|y| drift(cone.value(y))).fold(0.0, f64::max);
    println!("max relative drift: deterministic {:.2e}, stochastic {:.2e}", worst(&det), worst(&sto));
    Ok(())
}
