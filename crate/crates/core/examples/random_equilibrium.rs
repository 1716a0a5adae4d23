//! Draw the random equilibrium u(ω) of the logistic equation and compare with
//! its Gamma law.

use stochastic_lv::experiments::{random_equilibrium_samples, summarize_scalar, EquilibriumSampleOptions};
use stochastic_lv::logistic::{LogisticParams, StationaryLaw};

fn main() -> stochastic_lv::Result<()> {
    let params = LogisticParams::stratonovich(1.0, 1.0)?;
    let law = StationaryLaw::of(&params)?;
    let opts = EquilibriumSampleOptions {
        samples: 2000,
        ..Default::default()
    };
    let u = random_equilibrium_samples(&params, &opts)?;
    let s = summarize_scalar(&params, &u)?;
    println!("law mean {:.3} variance {:.3}", law.mean(), law.variance());
    println!("sample mean {:.3} variance {:.3} KS {:.4} (n = {})", s.mean, s.variance, s.ks, s.samples);
    Ok(())
}
