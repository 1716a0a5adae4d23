//! Dwell times near the May-Leonard saddles and the two exit-time
//! subsequences of time averages.

use stochastic_lv::lv::integrate_ode;
use stochastic_lv::presets;
use stochastic_lv::turbulence::{dwell_fraction, dwell_times, nonunique_time_averages, vertex, TurbulenceOptions};

fn main() -> stochastic_lv::Result<()> {
    let y0 = [0.5, 0.3, 0.2];
    let traj = integrate_ode(&presets::may_leonard(0.8, 1.3, 0.0), &y0, 4500.0, 0.01)?;
    for i in 1..=3 {
        let rec = dwell_times(&traj, &vertex(3, i), 0.5)?;
        println!("R{i}: {} visits, dwell fractions {:.3?}", rec.cycles(), dwell_fraction(&rec)?);
    }
    let opts = TurbulenceOptions {
        path_count: 200,
        ..Default::default()
    };
    let rep = nonunique_time_averages(&presets::may_leonard(0.8, 1.3, 0.05), &y0, &opts)?;
    println!("  n    T_out    S_out   det(T)  det(S)   mc(T)   mc(S)");
    for r in &rep.rows {
        println!(
            "{:3} {:8.1} {:8.1} {:7.3} {:7.3} {:7.3} {:7.3}",
            r.n,
            r.t_out,
            r.s_out,
            r.det_avg_at_tout,
            r.det_avg_at_sout,
            r.avg_at_tout.unwrap_or(f64::NAN),
            r.avg_at_sout.unwrap_or(f64::NAN)
        );
    }
    println!("gap at the last exit: {:.3}", rep.summary.gap);
    Ok(())
}
