//! Direct Euler–Maruyama and Milstein integration of
//! `dy_i = y_i(r + Σ a_ij y_j)dt + σ y_i dB`.
//!
//! Stratonovich systems are integrated in their Itô form, i.e. with the drift
//! rate raised from `r` to `r + σ²/2`. Both schemes consume the increments of
//! the supplied [`BrownianPath`], so they can be compared pathwise with the
//! decomposition formula.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::logistic::Calculus;
use crate::lv::{LVSystem, Trajectory};
use crate::paths::BrownianPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyama,
    Milstein,
}

#[derive(Clone, Copy, Debug)]
pub struct SdeOptions {
    /// Largest tolerated fraction of steps with a clamped component.
    pub max_clamp_fraction: f64,
}

impl Default for SdeOptions {
    fn default() -> Self {
        Self {
            max_clamp_fraction: 1e-2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdeRun {
    pub trajectory: Trajectory,
    /// Number of steps in which some component went negative and was set to 0.
    pub clamps: usize,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClampReport {
    pub clamps: usize,
    pub steps: usize,
    pub per_10k_steps: f64,
}

impl SdeRun {
    pub fn clamp_report(&self) -> ClampReport {
        ClampReport {
            clamps: self.clamps,
            steps: self.steps,
            per_10k_steps: 1e4 * self.clamps as f64 / self.steps.max(1) as f64,
        }
    }
}

/// Itô drift rate: `r`, or `r + σ²/2` for a Stratonovich system.
pub fn ito_rate(system: &LVSystem) -> f64 {
    match system.calculus {
        Calculus::Ito => system.r,
        Calculus::Stratonovich => system.r + 0.5 * system.sigma * system.sigma,
    }
}

pub fn integrate(
    scheme: Scheme,
    system: &LVSystem,
    path: &BrownianPath,
    y0: &[f64],
    horizon: f64,
    options: SdeOptions,
) -> Result<SdeRun> {
    system.check_state(y0)?;
    if horizon < 0.0 {
        return Err(invalid("T", "must be nonnegative"));
    }
    let w = path.forward_values(horizon)?;
    let h = path.step();
    let n = system.n();
    let rate = ito_rate(system) - system.r;
    let sigma = system.sigma;
    let steps = w.len() - 1;

    let mut traj = Trajectory::with_capacity(n, w.len());
    traj.meta.step = h;
    traj.meta.seed = Some(path.seed());
    let mut y = y0.to_vec();
    let mut next = vec![0.0; n];
    let mut clamps = 0;
    traj.push(0.0, &y);
    for k in 0..steps {
        let dw = w[k + 1] - w[k];
        let mut clamped = false;
        for i in 0..n {
            let drift = y[i] * (system.per_capita(&y, i) + rate);
            let mut v = y[i] + drift * h + sigma * y[i] * dw;
            if scheme == Scheme::Milstein {
                v += 0.5 * sigma * sigma * y[i] * (dw * dw - h);
            }
            if v < 0.0 {
                v = 0.0;
                clamped = true;
            }
            next[i] = v;
        }
        if clamped {
            clamps += 1;
        }
        std::mem::swap(&mut y, &mut next);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= 1e12) {
            return Err(Error::Diverged {
                time: (k + 1) as f64 * h,
                norm,
            });
        }
        traj.push((k + 1) as f64 * h, &y);
    }
    if clamps as f64 > options.max_clamp_fraction * steps.max(1) as f64 {
        return Err(Error::Resolution { clamps, steps });
    }
    Ok(SdeRun {
        trajectory: traj,
        clamps,
        steps,
    })
}

pub fn euler_maruyama(system: &LVSystem, path: &BrownianPath, y0: &[f64], horizon: f64) -> Result<SdeRun> {
    integrate(Scheme::EulerMaruyama, system, path, y0, horizon, SdeOptions::default())
}

pub fn milstein(system: &LVSystem, path: &BrownianPath, y0: &[f64], horizon: f64) -> Result<SdeRun> {
    integrate(Scheme::Milstein, system, path, y0, horizon, SdeOptions::default())
}
