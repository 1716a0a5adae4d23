//! Heuristic classification of the ω-limit set of a sampled trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lv::{distance, project_lenient, Trajectory};

/// Thresholds of [`omega_limit_classify_with`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaOptions {
    /// Trailing fraction of the trajectory inspected for equilibria and cycles.
    pub tail_fraction: f64,
    /// Relative spread of the tail below which it counts as an equilibrium.
    pub equilibrium_tol: f64,
    /// Radius of the simplex balls around the vertices used for dwell times.
    pub vertex_radius: f64,
    /// Median growth ratio of consecutive vertex dwell times.
    pub growth_ratio: f64,
    pub min_visits: usize,
    /// Relative standard deviation of successive return times.
    pub period_rel_std: f64,
    pub min_periods: usize,
    /// Tolerated relative change of the oscillation amplitude over the tail.
    pub amplitude_drift: f64,
    /// Shortest admissible trajectory, in time units.
    pub min_duration: f64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            tail_fraction: 0.5,
            equilibrium_tol: 1e-6,
            vertex_radius: 0.25,
            growth_ratio: 1.2,
            min_visits: 4,
            period_rel_std: 0.02,
            min_periods: 3,
            amplitude_drift: 0.1,
            min_duration: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaLimit {
    ConvergesToEquilibrium { point: Vec<f64> },
    Periodic { period: f64 },
    HeteroclinicLike { growth_ratio: f64, visits: usize },
    Unknown,
}

impl OmegaLimit {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ConvergesToEquilibrium { .. } => "converges_to_equilibrium",
            Self::Periodic { .. } => "periodic",
            Self::HeteroclinicLike { .. } => "heteroclinic_like",
            Self::Unknown => "unknown",
        }
    }
}

pub fn omega_limit_classify(traj: &Trajectory, tail_fraction: f64) -> Result<OmegaLimit> {
    omega_limit_classify_with(
        traj,
        &OmegaOptions {
            tail_fraction,
            ..OmegaOptions::default()
        },
    )
}

pub fn omega_limit_classify_with(traj: &Trajectory, opts: &OmegaOptions) -> Result<OmegaLimit> {
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(invalid("tail_fraction", "must lie in (0, 1]"));
    }
    if traj.len() < 3 || traj.duration() < opts.min_duration {
        return Err(Error::Insufficient(format!(
            "trajectory of duration {} is shorter than {}",
            traj.duration(),
            opts.min_duration
        )));
    }
    let start = ((1.0 - opts.tail_fraction) * (traj.len() - 1) as f64) as usize;
    let last = traj.last().expect("nonempty");
    let scale = 1.0 + last.iter().map(|v| v * v).sum::<f64>().sqrt();
    let spread = (start..traj.len()).map(|k| distance(traj.state(k), last)).fold(0.0, f64::max);
    if spread < opts.equilibrium_tol * scale {
        return Ok(OmegaLimit::ConvergesToEquilibrium { point: last.to_vec() });
    }

    if let Some((ratio, visits)) = vertex_dwell_growth(traj, opts.vertex_radius) {
        if visits >= opts.min_visits && ratio > opts.growth_ratio {
            return Ok(OmegaLimit::HeteroclinicLike {
                growth_ratio: ratio,
                visits,
            });
        }
    }

    if let Some(period) = tail_period(traj, start, opts) {
        return Ok(OmegaLimit::Periodic { period });
    }
    Ok(OmegaLimit::Unknown)
}

/// Median ratio of consecutive complete dwell times in the vertex balls of
/// the simplex, with the number of complete visits.
fn vertex_dwell_growth(traj: &Trajectory, radius: f64) -> Option<(f64, usize)> {
    let n = traj.dim();
    let mut current: Option<(usize, f64)> = None;
    let mut durations = Vec::new();
    for (k, y) in traj.states().enumerate() {
        let t = traj.times()[k];
        let Some(p) = project_lenient(y) else { continue };
        let inside = (0..n).find(|&i| {
            let d2: f64 = (0..n).map(|j| (p[j] - if i == j { 1.0 } else { 0.0 }).powi(2)).sum();
            d2.sqrt() < radius
        });
        match (current, inside) {
            (None, Some(i)) if k > 0 => current = Some((i, t)),
            (Some((i, t_in)), now) if now != Some(i) => {
                durations.push(t - t_in);
                current = now.map(|j| (j, t));
            }
            _ => {}
        }
    }
    if durations.len() < 2 {
        return None;
    }
    let mut ratios: Vec<f64> = durations.windows(2).map(|w| w[1] / w[0]).collect();
    ratios.sort_by(f64::total_cmp);
    Some((ratios[ratios.len() / 2], durations.len()))
}

/// Mean return time to the section `p₀ = mean(p₀)` (upward crossings) of
/// the projected tail, if the returns are regular and the amplitude steady.
fn tail_period(traj: &Trajectory, start: usize, opts: &OmegaOptions) -> Option<f64> {
    let times = traj.times();
    let proj: Vec<Vec<f64>> = (start..traj.len()).filter_map(|k| project_lenient(traj.state(k))).collect();
    if proj.len() != traj.len() - start {
        return None;
    }
    let mean = proj.iter().map(|p| p[0]).sum::<f64>() / proj.len() as f64;
    let mut crossings = Vec::new();
    for k in 1..proj.len() {
        let (a, b) = (proj[k - 1][0] - mean, proj[k][0] - mean);
        if a < 0.0 && b >= 0.0 {
            let (t0, t1) = (times[start + k - 1], times[start + k]);
            crossings.push((k, t0 + (t1 - t0) * (-a) / (b - a)));
        }
    }
    if crossings.len() < opts.min_periods + 1 {
        return None;
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let m = periods.iter().sum::<f64>() / periods.len() as f64;
    let var = periods.iter().map(|p| (p - m).powi(2)).sum::<f64>() / periods.len() as f64;
    if var.sqrt() / m > opts.period_rel_std {
        return None;
    }
    let amplitude = |a: usize, b: usize| proj[a..b].iter().map(|p| p[0] - mean).fold(0.0, f64::max);
    let first = amplitude(crossings[0].0, crossings[1].0);
    let n = crossings.len();
    let last = amplitude(crossings[n - 2].0, crossings[n - 1].0);
    if first <= 0.0 || (last / first - 1.0).abs() > opts.amplitude_drift {
        return None;
    }
    Some(m)
}
