//! Sample a two-sided Brownian path, refine it and shift it.

use stochastic_lv::paths::BrownianPath;

fn main() -> stochastic_lv::Result<()> {
    let path = BrownianPath::sample(7, -2.0, 2.0, 0.5)?;
    let fine = path.refine();
    let shifted = path.shift(1.0)?;
    println!("{:>6} {:>10} {:>10}", "t", "W(t)", "θ₁W(t)");
    for (t, w) in path.samples() {
        let s = shifted.value(t).map(|v| format!("{v:10.5}")).unwrap_or_else(|_| format!("{:>10}", "-"));
        println!("{t:6.2} {w:10.5} {s}");
    }
    println!("refined step {} keeps W(1) = {:.5}", fine.step(), fine.value(1.0)?);
    Ok(())
}
