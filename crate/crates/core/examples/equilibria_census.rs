//! Equilibria and omega limits of the built-in three-species systems.

use stochastic_lv::equilibria::equilibria;
use stochastic_lv::lv::integrate_ode;
use stochastic_lv::omega::omega_limit_classify;
use stochastic_lv::presets;

fn main() -> stochastic_lv::Result<()> {
    for p in presets::all().into_iter().filter(|p| p.y0.len() == 3) {
        let det = p.system.with_noise(0.0, p.system.calculus);
        let census = equilibria(&det)?;
        let traj = integrate_ode(&det, &p.y0, 1000.0, 0.01)?;
        println!("{}: {} isolated, {} continua", p.name, census.isolated.len(), census.continua.len());
        for e in &census.isolated {
            println!("  {:?} {:?}", e.point.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(), e.stability);
        }
        println!("  omega limit from {:?}: {}", p.y0, omega_limit_classify(&traj, 0.5)?.label());
    }
    Ok(())
}
