//! The scalar stochastic logistic equation `dg = g(r − rg)dt + σg dB`.
//!
//! Its pathwise solution is explicit:
//!
//! ```text
//! g(t) = x·exp(X_t) / (1 + r·x·∫₀ᵗ exp(X_s) ds),   X_t = ρt + σW(t)
//! ```
//!
//! with `ρ = r` for the Stratonovich equation and `ρ = r − σ²/2` for the Itô
//! equation. Integrals of `exp(X)` are taken over the piecewise-linear
//! interpolant of `X` on the path grid (an exponential trapezoid rule, exact
//! when σ = 0), evaluated in the rescaled form
//! `g = x / (exp(−X_t) + r·x·∫₀ᵗ exp(X_s − X_t) ds)` so that long horizons
//! never overflow.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::paths::BrownianPath;
use crate::special::{gamma_p, gamma_pdf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Ito,
    Stratonovich,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub r: f64,
    pub sigma: f64,
    pub calculus: Calculus,
}

impl LogisticParams {
    pub fn new(r: f64, sigma: f64, calculus: Calculus) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid("r", format!("growth rate must be positive, got {r}")));
        }
        if !sigma.is_finite() {
            return Err(invalid("sigma", "must be finite"));
        }
        Ok(Self { r, sigma, calculus })
    }

    pub fn stratonovich(r: f64, sigma: f64) -> Result<Self> {
        Self::new(r, sigma, Calculus::Stratonovich)
    }

    pub fn ito(r: f64, sigma: f64) -> Result<Self> {
        Self::new(r, sigma, Calculus::Ito)
    }

    /// Exponent ρ in `exp(ρt + σW(t))`.
    pub fn rho(&self) -> f64 {
        match self.calculus {
            Calculus::Stratonovich => self.r,
            Calculus::Ito => self.r - 0.5 * self.sigma * self.sigma,
        }
    }

    /// Default backward truncation for the random equilibrium integral.
    pub fn default_truncation(&self) -> f64 {
        let rho = self.rho();
        (40.0 / rho).max(40.0 * self.sigma * self.sigma / (rho * rho))
    }
}

fn check_start(g0: f64) -> Result<()> {
    if !(g0 > 0.0) || !g0.is_finite() {
        return Err(invalid("g0", format!("initial value must be positive, got {g0}")));
    }
    Ok(())
}

/// `g(t_k)` for every grid point of `[0, t]`.
pub fn g_series(params: &LogisticParams, path: &BrownianPath, g0: f64, t: f64) -> Result<Vec<f64>> {
    check_start(g0)?;
    let w = path.forward_values(t)?;
    Ok(g_series_from_values(params, path.step(), &w, g0))
}

pub(crate) fn g_series_from_values(params: &LogisticParams, step: f64, w: &[f64], g0: f64) -> Vec<f64> {
    let (r, rho, sigma) = (params.r, params.rho(), params.sigma);
    let mut out = Vec::with_capacity(w.len());
    // scaled = ∫₀^{t_k} exp(X_s − X_k) ds
    let mut scaled = 0.0;
    let mut x_prev = 0.0;
    out.push(g0);
    for (k, wk) in w.iter().enumerate().skip(1) {
        let x = rho * (k as f64 * step) + sigma * wk;
        let d = x - x_prev;
        scaled = scaled * (-d).exp() + step * exp_weight(-d);
        out.push(g0 / ((-x).exp() + r * g0 * scaled));
        x_prev = x;
    }
    out
}

/// Exact pathwise solution of the logistic equation at grid time `t ≥ 0`.
pub fn g_exact(params: &LogisticParams, path: &BrownianPath, g0: f64, t: f64) -> Result<f64> {
    Ok(*g_series(params, path, g0, t)?.last().expect("nonempty"))
}

/// `(1/T)∫₀ᵀ g(s) ds` by the trapezoid rule.
pub fn time_average_g(params: &LogisticParams, path: &BrownianPath, g0: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(invalid("T", format!("must be positive, got {horizon}")));
    }
    let g = g_series(params, path, g0, horizon)?;
    Ok(trapezoid(&g, path.step()) / horizon)
}

/// Pull-back average `(1/t)∫₀ᵗ g(s, θ_{−t}ω, x) ds`.
pub fn time_average_g_pullback(params: &LogisticParams, path: &BrownianPath, g0: f64, t: f64) -> Result<f64> {
    let shifted = path.shift(-t)?;
    time_average_g(params, &shifted, g0, t)
}

/// `(e^d − 1)/d`, the exact integral of `exp` over a unit interval on which
/// the exponent rises linearly by `d`.
#[inline]
pub(crate) fn exp_weight(d: f64) -> f64 {
    if d.abs() < 1e-8 {
        1.0 + 0.5 * d
    } else {
        d.exp_m1() / d
    }
}

pub(crate) fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// `u(ω)` together with an estimate of the neglected tail.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RandomEquilibrium {
    pub value: f64,
    pub truncation: f64,
    /// Bound `(2/ρ)·exp(−ρT/2)` on the neglected part of the integral,
    /// relative to the retained part.
    pub relative_tail: f64,
    /// Set when the tail bound exceeds `1e−6` or the path at `−T` already
    /// violates the envelope `σW(s) ≤ ρ|s|/2` the bound relies on.
    pub insufficient: bool,
}

/// Random equilibrium `u(ω) = (r ∫_{−T}^0 exp(ρs + σW(s)) ds)^{−1}`.
pub fn u_random_equilibrium(params: &LogisticParams, path: &BrownianPath, truncation: f64) -> Result<RandomEquilibrium> {
    if !(truncation > 0.0) {
        return Err(invalid("T", format!("truncation must be positive, got {truncation}")));
    }
    let rho = params.rho();
    if rho <= 0.0 {
        return Err(Error::Degenerate(format!(
            "no random equilibrium: exponent ρ = {rho} is not positive (σ² ≥ 2r for Itô)"
        )));
    }
    let k = path.index_of(-truncation)?;
    let w = path.values_between(k, 0)?;
    let step = path.step();
    let sigma = params.sigma;
    let exponent: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, wi)| rho * ((k + i as i64) as f64 * step) + sigma * wi)
        .collect();
    let integral: f64 = exponent
        .windows(2)
        .map(|x| step * x[0].exp() * exp_weight(x[1] - x[0]))
        .sum();
    let value = 1.0 / (params.r * integral);
    let tail = 2.0 / rho * (-0.5 * rho * truncation).exp();
    let relative_tail = tail / integral;
    let envelope_broken = sigma * w[0] > 0.5 * rho * truncation;
    Ok(RandomEquilibrium {
        value,
        truncation,
        relative_tail,
        insufficient: relative_tail > 1e-6 || envelope_broken,
    })
}

/// Stationary law of the logistic factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StationaryLaw {
    Gamma { shape: f64, rate: f64 },
    /// σ = 0: the point mass δ₁.
    Degenerate { at: f64 },
}

/// Value of the stationary density, tagged when the law has no density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Density {
    Value(f64),
    PointMass { at: f64 },
}

impl StationaryLaw {
    /// Stratonovich: Gamma(2r/σ², 2r/σ²). Itô: Gamma(2r/σ² − 1, 2r/σ²), which
    /// needs σ² < 2r.
    pub fn of(params: &LogisticParams) -> Result<Self> {
        if params.sigma == 0.0 {
            return Ok(Self::Degenerate { at: 1.0 });
        }
        let k = 2.0 * params.r / (params.sigma * params.sigma);
        let shape = match params.calculus {
            Calculus::Stratonovich => k,
            Calculus::Ito => k - 1.0,
        };
        if shape <= 0.0 {
            return Err(Error::Degenerate(format!(
                "Itô logistic law needs σ² < 2r (r = {}, σ = {})",
                params.r, params.sigma
            )));
        }
        Ok(Self::Gamma { shape, rate: k })
    }

    pub fn density(&self, x: f64) -> Density {
        match *self {
            Self::Gamma { shape, rate } => Density::Value(gamma_pdf(shape, rate, x)),
            Self::Degenerate { at } => Density::PointMass { at },
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => gamma_p(shape, rate * x.max(0.0)),
            Self::Degenerate { at } => {
                if x >= at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => shape / rate,
            Self::Degenerate { at } => at,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => shape / (rate * rate),
            Self::Degenerate { .. } => 0.0,
        }
    }
}

pub fn stationary_density(params: &LogisticParams, x: f64) -> Result<Density> {
    if x < 0.0 {
        return Err(invalid("x", "must be nonnegative"));
    }
    Ok(StationaryLaw::of(params)?.density(x))
}

pub fn stationary_cdf(params: &LogisticParams, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(invalid("x", "must be nonnegative"));
    }
    Ok(StationaryLaw::of(params)?.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_path;

    fn strat(r: f64, s: f64) -> LogisticParams {
        LogisticParams::stratonovich(r, s).unwrap()
    }

    #[test]
    fn noiseless_equilibrium_stays_put() {
        let p = sample_path(1, 0.0, 10.0, 0.01).unwrap();
        for &t in &[0.0, 0.5, 3.0, 10.0] {
            let g = g_exact(&strat(1.3, 0.0), &p, 1.0, t).unwrap();
            assert!((g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_closed_form() {
        // σ = 0, r = 1, x = 1/2, t = ln 2: x·eᵗ/(1 + x(eᵗ − 1)) = 2/3.
        let t = std::f64::consts::LN_2;
        let p = sample_path(1, 0.0, t, t / 4000.0).unwrap();
        let g = g_exact(&strat(1.0, 0.0), &p, 0.5, t).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-13, "{g}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = sample_path(1, -1.0, 1.0, 0.1).unwrap();
        assert!(g_exact(&strat(1.0, 0.5), &p, 0.0, 0.5).is_err());
        assert!(g_exact(&strat(1.0, 0.5), &p, 1.0, 0.55).is_err());
        assert!(g_exact(&strat(1.0, 0.5), &p, 1.0, -0.5).is_err());
        assert!(LogisticParams::stratonovich(-1.0, 0.5).is_err());
        assert!(u_random_equilibrium(&strat(1.0, 0.5), &p, 2.0).is_err());
    }

    #[test]
    fn positivity_and_monotone_in_start() {
        let p = sample_path(11, 0.0, 30.0, 0.01).unwrap();
        let prm = strat(1.0, 1.5);
        let lo = g_series(&prm, &p, 0.3, 30.0).unwrap();
        let hi = g_series(&prm, &p, 0.31, 30.0).unwrap();
        for (k, (a, b)) in lo.iter().zip(&hi).enumerate() { assert!(*a > 0.0 && *a <= b * (1.0 + 1e-12), "k={k} {a} {b}"); }
        // the dependence on g0 decays like exp(−X_t); it is resolvable early on
        assert!(lo[..200].iter().zip(&hi[..200]).all(|(a, b)| a < b));
    }

    #[test]
    fn calculus_coherence() {
        // Stratonovich with r equals Itô drift r + σ²/2 ... both have exponent r.
        let p = sample_path(2, 0.0, 5.0, 0.001).unwrap();
        let s = strat(1.0, 0.7);
        let i = LogisticParams::ito(1.0, 0.7).unwrap();
        assert_eq!(s.rho(), 1.0);
        assert!((i.rho() - (1.0 - 0.245)).abs() < 1e-15);
        let gs = g_series(&s, &p, 1.0, 5.0).unwrap();
        let gi = g_series(&i, &p, 1.0, 5.0).unwrap();
        assert!(gs.iter().zip(&gi).any(|(a, b)| (a - b).abs() > 1e-3));
    }

    #[test]
    fn noiseless_random_equilibrium() {
        let p = sample_path(3, -5.0, 0.0, 0.001).unwrap();
        let u = u_random_equilibrium(&strat(1.0, 0.0), &p, 5.0).unwrap();
        let want = 1.0 / (1.0 - (-5.0f64).exp());
        assert!((u.value - want).abs() < 1e-12, "{} vs {want}", u.value);
        assert!(u.insufficient);
        let p = sample_path(3, -40.0, 0.0, 0.01).unwrap();
        let u = u_random_equilibrium(&strat(1.0, 0.0), &p, 40.0).unwrap();
        assert!((u.value - 1.0).abs() < 1e-4);
        assert!(!u.insufficient);
    }

    #[test]
    fn equilibrium_is_invariant_under_the_shift() {
        // g(t, ω, u(ω)) = u(θ_t ω)
        let prm = strat(1.0, 0.8);
        let p = sample_path(21, -60.0, 5.0, 0.001).unwrap();
        let u0 = u_random_equilibrium(&prm, &p, 50.0).unwrap().value;
        for &t in &[0.5, 2.0, 5.0] {
            let g = g_exact(&prm, &p, u0, t).unwrap();
            let ut = u_random_equilibrium(&prm, &p.shift(t).unwrap(), 50.0).unwrap().value;
            assert!((g - ut).abs() < 1e-9 * ut, "t={t}: {g} vs {ut}");
        }
    }

    #[test]
    fn law_moments() {
        let law = StationaryLaw::of(&strat(1.0, 1.0)).unwrap();
        assert_eq!(law, StationaryLaw::Gamma { shape: 2.0, rate: 2.0 });
        assert!((law.variance() - 0.5).abs() < 1e-15);
        for &(r, s) in &[(0.3, 0.2), (1.0, 2.0), (4.0, 0.1)] {
            assert!((StationaryLaw::of(&strat(r, s)).unwrap().mean() - 1.0).abs() < 1e-12);
        }
        let ito = StationaryLaw::of(&LogisticParams::ito(1.0, 1.0).unwrap()).unwrap();
        assert!((ito.mean() - 0.5).abs() < 1e-15);
        assert!(StationaryLaw::of(&LogisticParams::ito(1.0, 1.5).unwrap()).is_err());
    }

    #[test]
    fn degenerate_law() {
        let prm = strat(1.0, 0.0);
        assert_eq!(stationary_density(&prm, 0.7).unwrap(), Density::PointMass { at: 1.0 });
        assert_eq!(stationary_cdf(&prm, 0.99).unwrap(), 0.0);
        assert_eq!(stationary_cdf(&prm, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn density_normalizes() {
        // composite Simpson on [0, 60] with a fine grid near the origin
        for &(r, s) in &[(1.0, 1.0), (1.0, 0.5), (2.0, 1.0), (0.5, 1.0)] {
            let law = StationaryLaw::of(&strat(r, s)).unwrap();
            let f = |x: f64| match law.density(x) {
                Density::Value(v) => v,
                Density::PointMass { .. } => unreachable!(),
            };
            let n = 600_000;
            let h = 60.0 / n as f64;
            let mut acc = f(0.0) + f(60.0);
            for i in 1..n {
                acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let total = acc * h / 3.0;
            assert!((total - 1.0).abs() < 1e-10, "r={r} σ={s}: {total}");
        }
    }

    #[test]
    fn time_average_noiseless() {
        let p = sample_path(1, 0.0, 20.0, 0.01).unwrap();
        assert!((time_average_g(&strat(1.0, 0.0), &p, 1.0, 20.0).unwrap() - 1.0).abs() < 1e-12);
    }
}
