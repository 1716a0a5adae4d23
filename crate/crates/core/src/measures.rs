//! Empirical stationary measures and their validation.
//!
//! A measure is the pooled time average `(1/T)∫P(t,y,·)dt` over independent
//! paths, sampled on a uniform grid after a burn-in.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{decomposed_trajectory, segment_distance, ConeReference};
use crate::error::{invalid, Error, Result};
use crate::logistic::{stationary_cdf, LogisticParams};
use crate::lv::{distance, integrate_ode, project_lenient, LVSystem};
use crate::paths::sample_path;
use crate::seed::derive_seed;

#[derive(Clone, Debug, Serialize)]
pub struct MeasureMeta {
    pub system: String,
    pub y0: Vec<f64>,
    pub horizon: f64,
    pub burn_in: f64,
    pub path_count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    pub meta: MeasureMeta,
}

impl EmpiricalMeasure {
    /// Equal-weight measure on `points`.
    pub fn from_points(dim: usize, points: Vec<f64>, meta: MeasureMeta) -> Result<Self> {
        if dim == 0 || points.is_empty() || points.len() % dim != 0 {
            return Err(Error::Insufficient("an empirical measure needs at least one sample".into()));
        }
        let n = points.len() / dim;
        Ok(Self {
            dim,
            points,
            weights: vec![1.0 / n as f64; n],
            meta,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mass of the samples satisfying `pred`.
    pub fn mass<F: Fn(&[f64]) -> bool>(&self, pred: F) -> f64 {
        self.points().zip(&self.weights).filter(|(p, _)| pred(p)).map(|(_, w)| w).sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.points().zip(&self.weights) {
            for i in 0..self.dim {
                m[i] += w * p[i];
            }
        }
        m
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mixture(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(invalid("measure", "dimensions differ"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid("lambda", "must lie in [0, 1]"));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| lambda * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - lambda) * w));
        Ok(Self {
            dim: self.dim,
            points,
            weights,
            meta: self.meta.clone(),
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("y{i}")).collect();
        writeln!(w, "{},weight", header.join(","))?;
        for (p, wt) in self.points().zip(&self.weights) {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(w, "{},{wt:.12e}", row.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingOptions {
    pub step: f64,
    /// Time between recorded samples along one path.
    pub sample_interval: f64,
    pub seed: u64,
    pub g0: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            step: 0.01,
            sample_interval: 1.0,
            seed: 0,
            g0: 1.0,
        }
    }
}

/// Burn-in used when none is given: a fifth of the horizon.
pub fn default_burn_in(horizon: f64) -> f64 {
    horizon / 5.0
}

/// Samples `Φ(t, ω, y0)` on `(burn_in, T]` every `sample_interval` for
/// `path_count` independent paths and pools them with equal weights.
pub fn empirical_time_average(
    system: &LVSystem,
    y0: &[f64],
    horizon: f64,
    path_count: usize,
    burn_in: f64,
    opts: &SamplingOptions,
) -> Result<EmpiricalMeasure> {
    system.check_state(y0)?;
    if !(horizon > burn_in && burn_in >= 0.0) {
        return Err(invalid("burn_in", format!("need 0 <= burn_in < T, got {burn_in} and {horizon}")));
    }
    if path_count == 0 {
        return Err(invalid("path_count", "must be positive"));
    }
    let stride = (opts.sample_interval / opts.step).round().max(1.0) as usize;
    let first = (burn_in / opts.step).floor() as usize + 1;
    let per_path: Vec<Result<Vec<f64>>> = (0..path_count)
        .into_par_iter()
        .map(|p| {
            let path = sample_path(derive_seed(opts.seed, p as u64), 0.0, horizon, opts.step)?;
            let traj = decomposed_trajectory(system, &path, y0, opts.g0, horizon)?;
            let last = traj.len() - 1;
            let mut out = Vec::new();
            // align on the end point so that T itself is always sampled
            let mut k = last;
            let mut picked = Vec::new();
            while k >= first {
                picked.push(k);
                if k < stride {
                    break;
                }
                k -= stride;
            }
            for &k in picked.iter().rev() {
                out.extend_from_slice(traj.state(k));
            }
            Ok(out)
        })
        .collect();
    let mut points = Vec::new();
    for chunk in per_path {
        points.extend(chunk?);
    }
    EmpiricalMeasure::from_points(
        system.n(),
        points,
        MeasureMeta {
            system: format!("{}-species", system.n()),
            y0: y0.to_vec(),
            horizon,
            burn_in,
            path_count,
            seed: opts.seed,
        },
    )
}

/// Law `μ^σ_P` on the ray through a nonzero equilibrium `P`.
#[derive(Clone, Debug, Serialize)]
pub struct RayLaw {
    pub anchor: Vec<f64>,
    pub params: LogisticParams,
}

impl RayLaw {
    pub fn new(anchor: &[f64], params: LogisticParams) -> Result<Self> {
        if anchor.iter().any(|v| !(*v >= 0.0)) || anchor.iter().all(|v| *v == 0.0) {
            return Err(invalid("P", "anchor must be nonnegative and nonzero"));
        }
        Ok(Self {
            anchor: anchor.to_vec(),
            params,
        })
    }

    /// `min{yᵢ/pᵢ : pᵢ ≠ 0}`, the ray coordinate of the largest multiple of
    /// `P` below `y`.
    pub fn radial(&self, y: &[f64]) -> f64 {
        self.anchor
            .iter()
            .zip(y)
            .filter(|(p, _)| **p != 0.0)
            .map(|(p, v)| v / p)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn ray_cdf(law: &RayLaw, y: &[f64]) -> Result<f64> {
    stationary_cdf(&law.params, law.radial(y).max(0.0))
}

/// Kolmogorov–Smirnov distance between an equally weighted sample and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    let w = vec![1.0 / sample.len().max(1) as f64; sample.len()];
    ks_distance_weighted(sample, &w, cdf)
}

pub fn ks_distance_weighted<F: Fn(f64) -> f64>(sample: &[f64], weights: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Insufficient("KS distance of an empty sample".into()));
    }
    let mut idx: Vec<usize> = (0..sample.len()).collect();
    idx.sort_by(|&a, &b| sample[a].total_cmp(&sample[b]));
    let total: f64 = weights.iter().sum();
    let mut below = 0.0;
    let mut d: f64 = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let x = sample[idx[k]];
        let f = cdf(x);
        d = d.max(f - below);
        while k < idx.len() && sample[idx[k]] == x {
            below += weights[idx[k]] / total;
            k += 1;
        }
        d = d.max(below - f);
    }
    Ok(d)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Insufficient("KS distance of an empty sample".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    Ok(d)
}

#[derive(Clone, Debug)]
pub enum Geometry {
    Ray(Vec<f64>),
    Cone(ConeReference),
    /// The three (or n) nonnegative coordinate axes.
    Axes,
    /// Coordinate hyperplanes away from the axes.
    BoundaryPlanes,
    /// Euclidean ball in state space.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Geometry {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ray(_) => "ray",
            Self::Cone(_) => "cone",
            Self::Axes => "axes",
            Self::BoundaryPlanes => "boundary-planes",
            Self::Ball { .. } => "ball",
        }
    }

    /// Distance of `y` to the set, in the simplex metric except for balls.
    /// The origin is at distance 0 from every cone.
    pub fn distance(&self, y: &[f64]) -> f64 {
        if let Self::Ball { center, .. } = self {
            return distance(y, center);
        }
        let Some(p) = project_lenient(y) else { return 0.0 };
        match self {
            Self::Ray(anchor) => project_lenient(anchor).map_or(f64::INFINITY, |q| distance(&p, &q)),
            Self::Cone(c) => c.distance(&p).unwrap_or(0.0),
            Self::Axes => axes_distance(&p),
            Self::BoundaryPlanes => p.iter().cloned().fold(f64::INFINITY, f64::min) * plane_scale(p.len()),
            Self::Ball { .. } => unreachable!(),
        }
    }

    fn contains(&self, y: &[f64], tol: f64) -> bool {
        match self {
            Self::Ball { radius, .. } => self.distance(y) <= *radius,
            Self::BoundaryPlanes => self.distance(y) <= tol && Self::Axes.distance(y) > tol,
            _ => self.distance(y) <= tol,
        }
    }
}

/// Distance on the simplex from `p` to the nearest vertex, i.e. to the
/// projection of the nearest coordinate axis.
fn axes_distance(p: &[f64]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let e: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
            distance(p, &e)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Converts the smallest barycentric coordinate into the Euclidean distance
/// to the opposite face of the standard simplex.
fn plane_scale(n: usize) -> f64 {
    let n = n as f64;
    (n / (n - 1.0)).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct MassReport {
    pub geometry: &'static str,
    pub tolerance: f64,
    pub mass: f64,
    pub max_distance: f64,
}

pub fn support_diagnostics(measure: &EmpiricalMeasure, geometry: &Geometry, tolerance: f64) -> MassReport {
    let mass = measure.mass(|y| geometry.contains(y, tolerance));
    let max_distance = measure.points().map(|y| geometry.distance(y)).fold(0.0, f64::max);
    MassReport {
        geometry: geometry.label(),
        tolerance,
        mass,
        max_distance,
    }
}

/// Deterministic closed orbit on the simplex with its time parametrization.
#[derive(Clone, Debug)]
pub struct OrbitParam {
    origin: Vec<f64>,
    points: Vec<Vec<f64>>,
    times: Vec<f64>,
    pub period: f64,
}

impl OrbitParam {
    /// Traces one revolution of the deterministic flow after running it from
    /// `start` for `settle` time units, long enough to reach the closed orbit.
    pub fn trace(system: &LVSystem, start: &[f64], step: f64, settle: f64, max_time: f64) -> Result<Self> {
        let det = system.with_noise(0.0, system.calculus);
        let warm = integrate_ode(&det, start, settle, step)?;
        let on_orbit = warm.last().expect("nonempty").to_vec();
        let traj = integrate_ode(&det, &on_orbit, max_time, step)?;
        let origin = on_orbit;
        let proj: Vec<Vec<f64>> = traj.states().map(|y| project_lenient(y).unwrap_or_default()).collect();
        let p0 = &proj[0];
        // direction of travel through the start; the section is the line
        // through p0 orthogonal to it
        let dir: Vec<f64> = (0..p0.len()).map(|i| proj[1][i] - p0[i]).collect();
        let side = |p: &[f64]| (0..p.len()).map(|i| (p[i] - p0[i]) * dir[i]).sum::<f64>();
        let far = proj.iter().map(|p| distance(p, p0)).fold(0.0, f64::max);
        let mut left = false;
        for k in 1..proj.len() {
            if distance(&proj[k], p0) > 0.25 * far {
                left = true;
            }
            if left && side(&proj[k - 1]) < 0.0 && side(&proj[k]) >= 0.0 {
                let (a, b) = (side(&proj[k - 1]), side(&proj[k]));
                let t0 = traj.times()[k - 1];
                let period = t0 + step * (-a) / (b - a);
                // about a thousand vertices per revolution
                let stride = (k / 1000).max(1);
                let mut points: Vec<Vec<f64>> = proj[..k].iter().step_by(stride).cloned().collect();
                let mut times: Vec<f64> = traj.times()[..k].iter().step_by(stride).copied().collect();
                points.push(p0.clone());
                times.push(period);
                return Ok(Self {
                    origin,
                    points,
                    times,
                    period,
                });
            }
        }
        Err(Error::Insufficient(format!("no return to the start within {max_time}")))
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// State at phase 0.
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Phase in `[0, 1)` of the orbit point nearest to `proj(y)`, and the
    /// distance to the orbit.
    pub fn phase(&self, y: &[f64]) -> Option<(f64, f64)> {
        let p = project_lenient(y)?;
        let last = self.points.len() - 1;
        let nearest = (0..last)
            .min_by(|&a, &b| distance(&p, &self.points[a]).total_cmp(&distance(&p, &self.points[b])))
            .expect("orbit has segments");
        // the closing point duplicates the first, so segments wrap around
        let before = if nearest == 0 { last - 1 } else { nearest - 1 };
        let mut best = (f64::INFINITY, 0.0);
        for s in [before, nearest] {
            let (a, b) = (&self.points[s], &self.points[s + 1]);
            let d = segment_distance(&p, a, b);
            if d < best.0 {
                let ab2: f64 = (0..p.len()).map(|i| (b[i] - a[i]).powi(2)).sum();
                let dot: f64 = (0..p.len()).map(|i| (p[i] - a[i]) * (b[i] - a[i])).sum();
                let u = if ab2 > 0.0 { (dot / ab2).clamp(0.0, 1.0) } else { 0.0 };
                let t = self.times[s] + u * (self.times[s + 1] - self.times[s]);
                best = (d, (t / self.period).rem_euclid(1.0));
            }
        }
        Some((best.1, best.0))
    }
}

#[derive(Clone, Debug)]
pub enum SweepTarget {
    Equilibrium { point: Vec<f64>, ball_radius: f64 },
    ClosedOrbit(OrbitParam),
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub samples: usize,
    pub mean: Vec<f64>,
    /// Distance from the empirical mean to the equilibrium, or the mean
    /// distance of the samples to the orbit.
    pub distance: f64,
    /// Mass within the ball around the equilibrium.
    pub ball_mass: Option<f64>,
    /// Standard deviation of the ray coordinate `min yᵢ/pᵢ`.
    pub radial_std: Option<f64>,
    /// KS distance of the phase marginal against the orbit's time law.
    pub phase_ks: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub horizon: f64,
    pub burn_in: Option<f64>,
    pub path_count: usize,
    pub sampling: SamplingOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            burn_in: None,
            path_count: 100,
            sampling: SamplingOptions::default(),
        }
    }
}

/// Per-σ summaries of the empirical measure from `y0`. For a closed orbit the
/// averaging window after burn-in is shortened to a whole number of periods.
pub fn sigma_sweep(
    system: &LVSystem,
    y0: &[f64],
    sigmas: &[f64],
    target: &SweepTarget,
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(invalid("sigmas", "need a nonempty list of positive intensities"));
    }
    if sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("sigmas", "must be strictly decreasing"));
    }
    let burn_in = opts.burn_in.unwrap_or_else(|| default_burn_in(opts.horizon));
    let horizon = match target {
        SweepTarget::ClosedOrbit(orbit) => {
            let periods = ((opts.horizon - burn_in) / orbit.period).floor();
            if periods < 1.0 {
                return Err(Error::Insufficient("averaging window shorter than one period".into()));
            }
            let h = opts.sampling.step;
            ((burn_in + periods * orbit.period) / h).round() * h
        }
        SweepTarget::Equilibrium { .. } => opts.horizon,
    };
    sigmas
        .iter()
        .map(|&sigma| {
            let sys = system.with_noise(sigma, system.calculus);
            let m = empirical_time_average(&sys, y0, horizon, opts.path_count, burn_in, &opts.sampling)?;
            let mean = m.mean();
            let row = match target {
                SweepTarget::Equilibrium { point, ball_radius } => {
                    let law = RayLaw::new(point, sys.logistic())?;
                    let radial: Vec<f64> = m.points().map(|y| law.radial(y)).collect();
                    let rm = radial.iter().sum::<f64>() / radial.len() as f64;
                    let var = radial.iter().map(|v| (v - rm).powi(2)).sum::<f64>() / radial.len() as f64;
                    SweepRow {
                        sigma,
                        samples: m.len(),
                        distance: distance(&mean, point),
                        mean,
                        ball_mass: Some(m.mass(|y| distance(y, point) <= *ball_radius)),
                        radial_std: Some(var.sqrt()),
                        phase_ks: None,
                    }
                }
                SweepTarget::ClosedOrbit(orbit) => {
                    let (phases, dists): (Vec<f64>, Vec<f64>) = m.points().filter_map(|y| orbit.phase(y)).unzip();
                    let ks = ks_distance(&phases, |x| x.clamp(0.0, 1.0))?;
                    SweepRow {
                        sigma,
                        samples: m.len(),
                        mean,
                        distance: dists.iter().sum::<f64>() / dists.len().max(1) as f64,
                        ball_mass: None,
                        radial_std: None,
                        phase_ks: Some(ks),
                    }
                }
            };
            Ok(row)
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "sigma,samples,distance,ball_mass,radial_std,phase_ks")?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.9e}"));
    for r in rows {
        writeln!(
            w,
            "{},{},{:.9e},{},{},{}",
            r.sigma,
            r.samples,
            r.distance,
            opt(r.ball_mass),
            opt(r.radial_std),
            opt(r.phase_ks)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::level_curve;
    use crate::presets;
    use crate::special::gamma_p;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma};

    fn meta() -> MeasureMeta {
        MeasureMeta {
            system: "test".into(),
            y0: vec![],
            horizon: 1.0,
            burn_in: 0.0,
            path_count: 1,
            seed: 0,
        }
    }

    #[test]
    fn ks_trivial_cases() {
        let c = vec![0.3; 50];
        let d = ks_distance(&c, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.7).abs() < 1e-15);
        let s: Vec<f64> = (0..100).map(|k| k as f64 * 0.37 % 1.0).collect();
        assert_eq!(ks_two_sample(&s, &s).unwrap(), 0.0);
        assert!(ks_distance(&[], |x| x).is_err());
        assert!((ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_on_true_law_is_small() {
        let prm = LogisticParams::stratonovich(1.0, 1.0).unwrap();
        let gamma = Gamma::new(2.0, 0.5).unwrap();
        let mut ds: Vec<f64> = (0..20)
            .map(|rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(rep);
                let s: Vec<f64> = (0..10_000).map(|_| gamma.sample(&mut rng)).collect();
                ks_distance(&s, |x| stationary_cdf(&prm, x).unwrap()).unwrap()
            })
            .collect();
        ds.sort_by(f64::total_cmp);
        assert!(ds[10] < 1.63 / 100.0);
    }

    #[test]
    fn ray_cdf_cases() {
        let prm = LogisticParams::stratonovich(1.0, 0.5).unwrap();
        let p = vec![1.0 / 3.1; 3];
        let law = RayLaw::new(&p, prm).unwrap();
        assert_eq!(ray_cdf(&law, &[0.0; 3]).unwrap(), 0.0);
        assert!((ray_cdf(&law, &[1e9; 3]).unwrap() - 1.0).abs() < 1e-15);
        let k = 2.0 / 0.25;
        assert!((ray_cdf(&law, &p).unwrap() - gamma_p(k, k)).abs() < 1e-14);
        for lambda in [0.3, 1.0, 2.5] {
            let y: Vec<f64> = p.iter().map(|v| lambda * v).collect();
            assert!((ray_cdf(&law, &y).unwrap() - stationary_cdf(&prm, lambda).unwrap()).abs() < 1e-12);
        }
        let boundary = RayLaw::new(&[0.5, 0.5, 0.0], prm).unwrap();
        assert!((boundary.radial(&[1.0, 2.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!(RayLaw::new(&[0.0; 3], prm).is_err());
    }

    #[test]
    fn noiseless_stable_equilibrium_is_a_point_mass() {
        let s = presets::may_leonard(0.5, 0.7, 0.0);
        let p = vec![1.0 / 2.2; 3];
        let m = empirical_time_average(&s, &p, 20.0, 2, 4.0, &SamplingOptions::default()).unwrap();
        assert_eq!(m.len(), 2 * 16);
        assert!(m.points().all(|y| distance(y, &p) < 1e-12));
        let w: f64 = m.weights().iter().sum();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn example_4_1_lives_on_its_ray() {
        let s = presets::example_4_1(0.5);
        let y0 = [0.2, 0.3, 0.1];
        let m = empirical_time_average(&s, &y0, 50.0, 8, 10.0, &SamplingOptions::default()).unwrap();
        let ray = support_diagnostics(&m, &Geometry::Ray(y0.to_vec()), 1e-3);
        assert!((ray.mass - 1.0).abs() < 1e-12);
        assert!(ray.max_distance < 1e-12, "{}", ray.max_distance);
    }

    #[test]
    fn mixtures_and_csv() {
        let a = EmpiricalMeasure::from_points(2, vec![1.0, 0.0, 1.0, 0.0], meta()).unwrap();
        let b = EmpiricalMeasure::from_points(2, vec![0.0, 1.0], meta()).unwrap();
        let m = a.mixture(&b, 0.25).unwrap();
        assert!((m.mass(|y| y[0] == 1.0) - 0.25).abs() < 1e-15);
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("y1,y2,weight"));
    }

    #[test]
    fn geometry_distances() {
        assert!(Geometry::Axes.distance(&[5.0, 0.0, 0.0]) < 1e-15);
        assert!(Geometry::Axes.distance(&[0.0; 3]) == 0.0);
        let bp = Geometry::BoundaryPlanes;
        assert!(bp.contains(&[1.0, 1.0, 0.0], 1e-3));
        assert!(!bp.contains(&[1.0, 0.0, 0.0], 1e-3));
        assert!(!bp.contains(&[1.0, 1.0, 1.0], 1e-3));
    }

    #[test]
    fn orbit_phase_is_uniform_along_the_orbit() {
        let s = presets::example_4_3(0.0);
        let curve = level_curve(presets::example_4_3_invariant, &[0.375, 0.25, 0.375], 1.0 / 400.0, 4).unwrap();
        let orbit = OrbitParam::trace(&s, &curve[0], 1e-3, 50.0, 100.0).unwrap();
        assert!(orbit.period > 0.5);
        let traj = integrate_ode(&s, orbit.origin(), 5.0 * orbit.period, 1e-3).unwrap();
        for (t, y) in traj.times().iter().zip(traj.states()) {
            let expected = (t / orbit.period).rem_euclid(1.0);
            let d = (orbit.phase(y).unwrap().0 - expected).abs();
            assert!(d.min(1.0 - d) < 1e-3, "{t} {d}");
        }
        assert!(traj.states().all(|y| orbit.phase(y).unwrap().1 < 1e-4));
    }

    #[test]
    fn sweep_validates_sigmas() {
        let s = presets::example_4_1(0.5);
        let t = SweepTarget::Equilibrium {
            point: vec![1.0 / 3.0; 3],
            ball_radius: 0.1,
        };
        let o = SweepOptions::default();
        assert!(sigma_sweep(&s, &[0.1; 3], &[0.1, 0.2], &t, &o).is_err());
        assert!(sigma_sweep(&s, &[0.1; 3], &[], &t, &o).is_err());
    }
}
