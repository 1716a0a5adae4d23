//! Strong errors of Euler-Maruyama and Milstein against the exact logistic
//! solution under step halving.

use stochastic_lv::logistic::{g_series, Calculus};
use stochastic_lv::lv::LVSystem;
use stochastic_lv::paths::BrownianPath;
use stochastic_lv::sde::{integrate, Scheme, SdeOptions};

fn main() -> stochastic_lv::Result<()> {
    let system = LVSystem::new(1.0, &[vec![-1.0]], 0.5, Calculus::Stratonovich)?;
    let mut path = BrownianPath::sample(3, 0.0, 1.0, 1e-2)?;
    for _ in 0..5 {
        let exact = g_series(&system.logistic(), &path, 0.5, 1.0)?;
        let err = |s| -> stochastic_lv::Result<f64> {
            let run = integrate(s, &system, &path, &[0.5], 1.0, SdeOptions::default())?;
            Ok(run.trajectory.states().zip(&exact).map(|(y, g)| (y[0] - g).abs()).fold(0.0, f64::max))
        };
        println!(
            "step {:.5}: euler {:.3e} milstein {:.3e}",
            path.step(),
            err(Scheme::EulerMaruyama)?,
            err(Scheme::Milstein)?
        );
        path = path.refine();
    }
    Ok(())
}
