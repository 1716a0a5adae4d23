//! The decomposition `Φ(t,ω,y) = g(t,ω,g₀)·Ψ(∫₀ᵗ g ds, y/g₀)`: the stochastic
//! flow is the deterministic flow run on the random clock `τ(t) = ∫₀ᵗ g ds`,
//! scaled by the logistic factor.
//!
//! The clock is evaluated exactly from the logistic solution. Writing
//! `X = ρt + σW`, the identity `r g = d/dt ln(1 + r g₀ ∫₀ᵗ e^X)` gives
//! `τ(t) = (X(t) + ln g₀ − ln g(t)) / r`, which stays finite for any horizon.

use crate::error::{invalid, Error, Result};
use crate::logistic::{g_series, LogisticParams};
use crate::lv::{distance, project_lenient, simplex_project, LVSystem, Rk4, Trajectory};
use crate::paths::BrownianPath;

/// `τ(t) = ∫₀ᵗ g(s,ω,g₀) ds` tabulated on the forward grid of a path.
#[derive(Clone, Debug)]
pub struct TimeChangedClock {
    pub params: LogisticParams,
    pub g0: f64,
    step: f64,
    seed: u64,
    g: Vec<f64>,
    tau: Vec<f64>,
}

impl TimeChangedClock {
    pub fn new(params: &LogisticParams, path: &BrownianPath, g0: f64, horizon: f64) -> Result<Self> {
        let g = g_series(params, path, g0, horizon)?;
        let w = path.forward_values(horizon)?;
        let (rho, sigma, r, h) = (params.rho(), params.sigma, params.r, path.step());
        let ln_g0 = g0.ln();
        let mut tau = Vec::with_capacity(g.len());
        tau.push(0.0);
        for k in 1..g.len() {
            let x = rho * (k as f64 * h) + sigma * w[k];
            let v = (x + ln_g0 - g[k].ln()) / r;
            // rounding must never make the clock run backwards
            tau.push(v.max(tau[k - 1]));
        }
        Ok(Self {
            params: *params,
            g0,
            step: h,
            seed: path.seed(),
            g,
            tau,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        (self.tau.len() - 1) as f64 * self.step
    }

    /// `g(t_k)` on the grid.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `τ(t_k)` on the grid.
    pub fn table(&self) -> &[f64] {
        &self.tau
    }

    /// `τ(t)` for any `t ∈ [0, horizon]`, linear between grid points.
    pub fn value(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        if !(t >= 0.0) || t > horizon * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                lo: t,
                hi: t,
                t_min: 0.0,
                t_max: horizon,
            });
        }
        let x = t / self.step;
        let k = (x.floor() as usize).min(self.tau.len() - 1);
        if k + 1 >= self.tau.len() {
            return Ok(self.tau[k]);
        }
        let frac = x - k as f64;
        Ok(self.tau[k] + frac * (self.tau[k + 1] - self.tau[k]))
    }

    /// Total clock time accumulated up to the horizon.
    pub fn range(&self) -> f64 {
        *self.tau.last().expect("nonempty")
    }
}

/// Stopping time `τ(ω,a) = inf{t > 0 : ∫₀ᵗ g ds > a}`, inverted linearly
/// between grid points.
pub fn stopping_time(clock: &TimeChangedClock, a: f64) -> Result<f64> {
    let tau = clock.table();
    if !(a >= 0.0) {
        return Err(invalid("a", format!("must be nonnegative, got {a}")));
    }
    if a > clock.range() {
        return Err(Error::OutOfDomain {
            lo: a,
            hi: a,
            t_min: 0.0,
            t_max: clock.range(),
        });
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    // first k with tau[k] >= a
    let k = tau.partition_point(|v| *v < a);
    let (lo, hi) = (tau[k - 1], tau[k]);
    let frac = if hi > lo { (a - lo) / (hi - lo) } else { 1.0 };
    Ok(((k - 1) as f64 + frac) * clock.step())
}

fn check_inputs(system: &LVSystem, y: &[f64], g0: f64, t: f64) -> Result<()> {
    system.check_state(y)?;
    if !(g0 > 0.0) || !g0.is_finite() {
        return Err(invalid("g0", format!("must be positive, got {g0}")));
    }
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Runs `Ψ` from `y/g₀` along an existing clock, returning `g·Ψ(τ)` at every
/// grid point. Each grid interval is covered by RK4 steps no longer than the
/// grid step.
pub fn decompose_on_clock(system: &LVSystem, clock: &TimeChangedClock, y: &[f64]) -> Result<Trajectory> {
    system.check_state(y)?;
    let n = system.n();
    let (g, tau, h) = (clock.g(), clock.table(), clock.step());
    let mut traj = Trajectory::with_capacity(n, g.len());
    traj.meta.step = h;
    traj.meta.seed = Some(clock.seed());
    let mut z: Vec<f64> = y.iter().map(|v| v / clock.g0).collect();
    let mut rk = Rk4::new(n);
    let mut out = vec![0.0; n];
    for k in 0..g.len() {
        if k > 0 {
            let dtau = tau[k] - tau[k - 1];
            let sub = (dtau / h).ceil().max(1.0);
            let hs = dtau / sub;
            for _ in 0..sub as usize {
                rk.step(system, &mut z, hs);
            }
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm <= 1e12) {
                return Err(Error::Diverged {
                    time: k as f64 * h,
                    norm,
                });
            }
        }
        for i in 0..n {
            out[i] = g[k] * z[i];
        }
        traj.push(k as f64 * h, &out);
    }
    Ok(traj)
}

/// `Φ(t_k, ω, y)` for every grid point of `[0, t]`.
pub fn decomposed_trajectory(system: &LVSystem, path: &BrownianPath, y: &[f64], g0: f64, t: f64) -> Result<Trajectory> {
    check_inputs(system, y, g0, t)?;
    let clock = TimeChangedClock::new(&system.logistic(), path, g0, t)?;
    decompose_on_clock(system, &clock, y)
}

/// `Φ(t, ω, y) = g(t,ω,g₀)·Ψ(τ(t), y/g₀)`.
pub fn phi_decomposed(system: &LVSystem, path: &BrownianPath, y: &[f64], g0: f64, t: f64) -> Result<Vec<f64>> {
    let traj = decomposed_trajectory(system, path, y, g0, t)?;
    Ok(traj.last().expect("nonempty").to_vec())
}

/// Pull-back state `Φ(t, θ_{−t}ω, y)`.
pub fn phi_pullback(system: &LVSystem, path: &BrownianPath, y: &[f64], g0: f64, t: f64) -> Result<Vec<f64>> {
    check_inputs(system, y, g0, t)?;
    path.require_window(-t, 0.0)?;
    phi_decomposed(system, &path.shift(-t)?, y, g0, t)
}

/// A set `S` on the simplex whose cone `Λ(S)` is tested for membership,
/// either a finite point set or a polyline through consecutive points.
#[derive(Clone, Debug)]
pub struct ConeReference {
    points: Vec<Vec<f64>>,
    polyline: bool,
    closed: bool,
}

impl ConeReference {
    pub fn points(states: &[Vec<f64>]) -> Result<Self> {
        Self::build(states, false, false)
    }

    /// A curve through `states` in order; `closed` joins the last to the first.
    pub fn curve(states: &[Vec<f64>], closed: bool) -> Result<Self> {
        Self::build(states, true, closed)
    }

    fn build(states: &[Vec<f64>], polyline: bool, closed: bool) -> Result<Self> {
        if states.is_empty() {
            return Err(invalid("S", "reference set must be nonempty"));
        }
        let points = states.iter().map(|s| simplex_project(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            polyline,
            closed,
        })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Simplex-metric distance from `proj(y)` to the reference set.
    pub fn distance(&self, y: &[f64]) -> Option<f64> {
        let p = project_lenient(y)?;
        let pts = &self.points;
        let mut best = pts.iter().map(|q| distance(&p, q)).fold(f64::INFINITY, f64::min);
        if self.polyline && pts.len() > 1 {
            let segs = if self.closed { pts.len() } else { pts.len() - 1 };
            for s in 0..segs {
                best = best.min(segment_distance(&p, &pts[s], &pts[(s + 1) % pts.len()]));
            }
        }
        Some(best)
    }
}

pub(crate) fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (mut ab2, mut ap_ab) = (0.0, 0.0);
    for i in 0..p.len() {
        let d = b[i] - a[i];
        ab2 += d * d;
        ap_ab += (p[i] - a[i]) * d;
    }
    let s = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    p.iter()
        .zip(a.iter().zip(b))
        .map(|(pi, (ai, bi))| {
            let d = pi - (ai + s * (bi - ai));
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Whether `y` lies in `Λ(S)` up to `tolerance` in the simplex metric. The
/// origin belongs to every cone.
pub fn cone_membership(reference: &ConeReference, y: &[f64], tolerance: f64) -> Result<bool> {
    if y.iter().any(|v| !(*v >= 0.0)) {
        return Err(invalid("y", "must be componentwise nonnegative"));
    }
    Ok(match reference.distance(y) {
        None => true,
        Some(d) => d <= tolerance,
    })
}

/// Closed level curve `{f = level}` on the 2-simplex around `center`, found
/// by bisection along `samples` equally spaced directions. `f` must exceed
/// `level` at the center and fall below it on the boundary.
pub fn level_curve<F>(f: F, center: &[f64], level: f64, samples: usize) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> f64,
{
    if center.len() != 3 {
        return Err(invalid("center", "level curves are traced on the 2-simplex"));
    }
    let c = simplex_project(center)?;
    if !(f(&c) > level) {
        return Err(invalid("level", "must lie below the value at the center"));
    }
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let e1 = [s2, -s2, 0.0];
    let e2 = [s6, s6, -2.0 * s6];
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let phi = std::f64::consts::TAU * k as f64 / samples as f64;
        let d: Vec<f64> = (0..3).map(|i| phi.cos() * e1[i] + phi.sin() * e2[i]).collect();
        // distance to the boundary along d
        let reach = (0..3)
            .filter(|&i| d[i] < 0.0)
            .map(|i| -c[i] / d[i])
            .fold(f64::INFINITY, f64::min);
        let at = |s: f64| -> Vec<f64> { (0..3).map(|i| (c[i] + s * d[i]).max(0.0)).collect() };
        let (mut lo, mut hi) = (0.0, reach);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(&at(mid)) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(at(0.5 * (lo + hi)));
    }
    Ok(out)
}
