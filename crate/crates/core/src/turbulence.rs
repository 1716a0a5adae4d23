//! Dwell times near the saddles of a heteroclinic cycle and the resulting
//! non-convergence of time averages.
//!
//! Along `Φ(t,ω,y) = g·Ψ(τ(t), y/g₀)` the simplex projection only depends on
//! the clock, so with `g₀ = 1` the indicator of a cone `Λ(A)` equals the
//! indicator of `τ(t)` lying in the dwell intervals of the deterministic
//! trajectory. Stochastic time averages are therefore clock occupation times
//! of those intervals.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{stopping_time, TimeChangedClock};
use crate::error::{invalid, Error, Result};
use crate::lv::{distance, integrate_ode, project_lenient, LVSystem, Trajectory};
use crate::paths::sample_path;
use crate::seed::derive_seed;

#[derive(Clone, Debug, Serialize)]
pub struct DwellRecord {
    /// 1-based vertex index when the center is a simplex vertex.
    pub center_index: Option<usize>,
    pub center: Vec<f64>,
    pub radius: f64,
    /// `(T_in, T_out)`; the last exit is missing if the run ends inside.
    pub entries: Vec<(f64, Option<f64>)>,
}

impl DwellRecord {
    /// Complete `(T_in, T_out)` pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.entries.iter().filter_map(|&(a, b)| b.map(|b| (a, b))).collect()
    }

    pub fn cycles(&self) -> usize {
        self.pairs().len()
    }

    /// Time spent inside during `[0, t]`.
    pub fn occupation(&self, t: f64) -> f64 {
        self.entries
            .iter()
            .map(|&(a, b)| (b.unwrap_or(f64::INFINITY).min(t) - a).max(0.0))
            .sum()
    }
}

fn offset(center: &[f64], radius: f64, y: &[f64]) -> f64 {
    project_lenient(y).map_or(f64::INFINITY, |p| distance(&p, center)) - radius
}

/// Entry and exit times of the simplex ball `B(center, radius)` along a
/// trajectory, each crossing refined by bisection on the linearly
/// interpolated state.
pub fn dwell_times(traj: &Trajectory, center: &[f64], radius: f64) -> Result<DwellRecord> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(invalid("radius", format!("must lie in (0, 1), got {radius}")));
    }
    if center.len() != traj.dim() {
        return Err(invalid("center", "dimension differs from the trajectory"));
    }
    let center_index = (0..center.len()).find(|&i| {
        center
            .iter()
            .enumerate()
            .all(|(j, v)| *v == if i == j { 1.0 } else { 0.0 })
    });
    let times = traj.times();
    let mut entries: Vec<(f64, Option<f64>)> = Vec::new();
    if traj.is_empty() {
        return Ok(DwellRecord {
            center_index: center_index.map(|i| i + 1),
            center: center.to_vec(),
            radius,
            entries,
        });
    }
    let mut prev = offset(center, radius, traj.state(0));
    if prev < 0.0 {
        entries.push((times[0], None));
    }
    let mut buf = vec![0.0; traj.dim()];
    for k in 1..traj.len() {
        let cur = offset(center, radius, traj.state(k));
        if (prev < 0.0) != (cur < 0.0) {
            let (a, b) = (traj.state(k - 1), traj.state(k));
            let mut f = |u: f64| {
                for i in 0..buf.len() {
                    buf[i] = a[i] + u * (b[i] - a[i]);
                }
                offset(center, radius, &buf)
            };
            let (t0, t1) = (times[k - 1], times[k]);
            let (mut lo, mut hi) = (0.0, 1.0);
            let tol = 1e-6 * t1.max(1.0) / (t1 - t0);
            while hi - lo > tol.min(1e-3) {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == (prev < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = t0 + 0.5 * (lo + hi) * (t1 - t0);
            if cur < 0.0 {
                entries.push((t, None));
            } else if let Some(last) = entries.last_mut() {
                last.1 = Some(t);
            }
        }
        prev = cur;
    }
    Ok(DwellRecord {
        center_index: center_index.map(|i| i + 1),
        center: center.to_vec(),
        radius,
        entries,
    })
}

/// Unit vector `R_i` (1-based).
pub fn vertex(n: usize, i: usize) -> Vec<f64> {
    (1..=n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

/// `(T_out − T_in)/T_out` for each complete visit.
pub fn dwell_fraction(record: &DwellRecord) -> Result<Vec<f64>> {
    let pairs = record.pairs();
    if pairs.len() < 3 {
        return Err(Error::Insufficient(format!(
            "dwell fractions need at least 3 complete visits, found {}",
            pairs.len()
        )));
    }
    Ok(pairs.iter().map(|(a, b)| (b - a) / b).collect())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbulenceOptions {
    /// Horizon of the deterministic pass that fixes `T_out^n` and `S_out^n`.
    pub horizon: f64,
    pub ode_step: f64,
    /// Grid step of the Brownian paths driving the clock.
    pub clock_step: f64,
    pub radius: f64,
    /// Index (1-based) of the ball `A` whose cone indicator is averaged.
    pub target: usize,
    /// Index of the ball whose next exit after `T_out^n` defines `S_out^n`.
    pub follower: usize,
    pub path_count: usize,
    pub seed: u64,
}

impl Default for TurbulenceOptions {
    fn default() -> Self {
        Self {
            horizon: 4500.0,
            ode_step: 0.01,
            clock_step: 0.02,
            radius: 0.5,
            target: 1,
            follower: 3,
            path_count: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TurbulenceRow {
    pub n: usize,
    pub t_in: f64,
    pub t_out: f64,
    pub fraction: f64,
    pub s_out: f64,
    pub det_avg_at_tout: f64,
    pub det_avg_at_sout: f64,
    /// Monte Carlo averages at the deterministic times.
    pub avg_at_tout: Option<f64>,
    pub avg_at_sout: Option<f64>,
    pub stderr_at_tout: Option<f64>,
    pub stderr_at_sout: Option<f64>,
    /// Averages up to the stopping times `τ(ω, T_out^n)` and `τ(ω, S_out^n)`.
    pub stop_avg_at_tout: Option<f64>,
    pub stop_avg_at_sout: Option<f64>,
    /// Fraction of `[0, T_out^n]` spent within 0.05 of the union of the balls.
    pub boundary_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TurbulenceSummary {
    pub sigma: f64,
    pub path_count: usize,
    pub limit_at_tout: f64,
    pub limit_at_sout: f64,
    pub gap: f64,
    pub det_limit_at_tout: f64,
    pub det_limit_at_sout: f64,
    pub det_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TurbulenceReport {
    pub rows: Vec<TurbulenceRow>,
    pub summary: TurbulenceSummary,
}

/// Time averages of the indicator of `Λ(A_target)` along the two exit-time
/// subsequences `T_out^n` (exits from `A_target`) and `S_out^n` (first exit
/// from `A_follower` after `T_out^n`), for the deterministic trajectory and,
/// when `σ > 0`, as Monte Carlo averages over `path_count` paths.
pub fn nonunique_time_averages(system: &LVSystem, y0: &[f64], opts: &TurbulenceOptions) -> Result<TurbulenceReport> {
    system.check_state(y0)?;
    let n = system.n();
    for (name, i) in [("target", opts.target), ("follower", opts.follower)] {
        if i == 0 || i > n {
            return Err(invalid(name, format!("ball index must lie in 1..={n}")));
        }
    }
    let det = system.with_noise(0.0, system.calculus);
    let traj = integrate_ode(&det, y0, opts.horizon, opts.ode_step)?;
    let balls: Vec<DwellRecord> = (1..=n)
        .map(|i| dwell_times(&traj, &vertex(n, i), opts.radius))
        .collect::<Result<_>>()?;
    let target = &balls[opts.target - 1];
    let follower = &balls[opts.follower - 1];
    let near = (1..=n)
        .map(|i| dwell_times(&traj, &vertex(n, i), (opts.radius + 0.05).min(0.999)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (k, (t_in, t_out)) in target.pairs().into_iter().enumerate() {
        let Some(s_out) = follower.entries.iter().filter_map(|e| e.1).find(|&s| s > t_out) else {
            break;
        };
        let boundary: f64 = near.iter().map(|r| r.occupation(t_out)).sum();
        rows.push(TurbulenceRow {
            n: k + 1,
            t_in,
            t_out,
            fraction: (t_out - t_in) / t_out,
            s_out,
            det_avg_at_tout: target.occupation(t_out) / t_out,
            det_avg_at_sout: target.occupation(s_out) / s_out,
            avg_at_tout: None,
            avg_at_sout: None,
            stderr_at_tout: None,
            stderr_at_sout: None,
            stop_avg_at_tout: None,
            stop_avg_at_sout: None,
            boundary_fraction: (boundary / t_out).min(1.0),
        });
    }
    if rows.is_empty() {
        return Err(Error::Insufficient(format!(
            "no complete cycle through balls {} and {} within T = {}",
            opts.target, opts.follower, opts.horizon
        )));
    }

    if system.sigma != 0.0 {
        monte_carlo(system, target, &mut rows, opts)?;
    }
    let last = rows.last().expect("nonempty");
    let (lt, ls) = match (last.avg_at_tout, last.avg_at_sout) {
        (Some(a), Some(b)) => (a, b),
        _ => (last.det_avg_at_tout, last.det_avg_at_sout),
    };
    let summary = TurbulenceSummary {
        sigma: system.sigma,
        path_count: if system.sigma != 0.0 { opts.path_count } else { 0 },
        limit_at_tout: lt,
        limit_at_sout: ls,
        gap: lt - ls,
        det_limit_at_tout: last.det_avg_at_tout,
        det_limit_at_sout: last.det_avg_at_sout,
        det_gap: last.det_avg_at_tout - last.det_avg_at_sout,
    };
    Ok(TurbulenceReport { rows, summary })
}

/// Time in `[0, t]` during which the clock lies in one of the intervals.
fn clock_occupation(clock: &TimeChangedClock, intervals: &[(f64, Option<f64>)], t: f64) -> Result<f64> {
    let cap = clock.value(t)?;
    let mut total = 0.0;
    for &(a, b) in intervals {
        if a >= cap {
            break;
        }
        let b = b.unwrap_or(f64::INFINITY).min(cap);
        total += stopping_time(clock, b)? - stopping_time(clock, a)?;
    }
    Ok(total)
}

fn monte_carlo(system: &LVSystem, target: &DwellRecord, rows: &mut [TurbulenceRow], opts: &TurbulenceOptions) -> Result<()> {
    if opts.path_count == 0 {
        return Err(invalid("path_count", "must be positive"));
    }
    let h = opts.clock_step;
    let last_s = rows.last().expect("nonempty").s_out;
    // the stopping-time variant needs τ to reach S_out on every path
    let horizon = ((1.25 * last_s) / h).ceil() * h;
    let params = system.logistic();
    let per_path: Vec<Result<Vec<[f64; 4]>>> = (0..opts.path_count)
        .into_par_iter()
        .map(|p| {
            let path = sample_path(derive_seed(opts.seed, p as u64), 0.0, horizon, h)?;
            let clock = TimeChangedClock::new(&params, &path, 1.0, horizon)?;
            rows.iter()
                .map(|row| {
                    let mut out = [f64::NAN; 4];
                    for (j, t) in [row.t_out, row.s_out].into_iter().enumerate() {
                        out[j] = clock_occupation(&clock, &target.entries, t)? / t;
                        if t <= clock.range() {
                            let s = stopping_time(&clock, t)?;
                            out[2 + j] = clock_occupation(&clock, &target.entries, s)? / s;
                        }
                    }
                    Ok(out)
                })
                .collect()
        })
        .collect();
    let mut all = Vec::with_capacity(per_path.len());
    for r in per_path {
        all.push(r?);
    }
    let m = all.len() as f64;
    for (k, row) in rows.iter_mut().enumerate() {
        let stats = |j: usize| {
            let vals: Vec<f64> = all.iter().map(|p| p[k][j]).filter(|v| v.is_finite()).collect();
            let c = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / c;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c - 1.0).max(1.0);
            (mean, (var / c).sqrt(), c)
        };
        let (a, sa, _) = stats(0);
        let (b, sb, _) = stats(1);
        let (c, _, nc) = stats(2);
        let (d, _, nd) = stats(3);
        row.avg_at_tout = Some(a);
        row.avg_at_sout = Some(b);
        row.stderr_at_tout = Some(sa);
        row.stderr_at_sout = Some(sb);
        row.stop_avg_at_tout = (nc == m).then_some(c);
        row.stop_avg_at_sout = (nd == m).then_some(d);
    }
    Ok(())
}

pub fn write_csv<W: Write>(rows: &[TurbulenceRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "n,T_in,T_out,fraction,avg_at_Tout,avg_at_Sout,S_out,det_avg_at_Tout,det_avg_at_Sout,stop_avg_at_Tout,stop_avg_at_Sout"
    )?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.9}"));
    for r in rows {
        writeln!(
            w,
            "{},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{},{}",
            r.n,
            r.t_in,
            r.t_out,
            r.fraction,
            r.avg_at_tout.unwrap_or(r.det_avg_at_tout),
            r.avg_at_sout.unwrap_or(r.det_avg_at_sout),
            r.s_out,
            r.det_avg_at_tout,
            r.det_avg_at_sout,
            opt(r.stop_avg_at_tout),
            opt(r.stop_avg_at_sout)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::decomposed_trajectory;
    use crate::presets;

    fn constant(y: &[f64], len: usize) -> Trajectory {
        let mut t = Trajectory::new(y.len());
        for k in 0..len {
            t.push(k as f64, y);
        }
        t
    }

    #[test]
    fn constant_trajectories() {
        let inside = dwell_times(&constant(&[0.9, 0.05, 0.05], 10), &vertex(3, 1), 0.5).unwrap();
        assert_eq!(inside.entries, vec![(0.0, None)]);
        assert_eq!(inside.center_index, Some(1));
        let outside = dwell_times(&constant(&[0.1, 0.1, 0.8], 10), &vertex(3, 1), 0.5).unwrap();
        assert!(outside.entries.is_empty());
        assert!(dwell_fraction(&outside).is_err());
        assert!(dwell_times(&constant(&[0.1; 3], 3), &vertex(3, 1), 1.5).is_err());
    }

    #[test]
    fn crossing_is_refined() {
        // straight line from (0,1,0) to (1,0,0) at unit speed in s, sampled coarsely
        let mut t = Trajectory::new(3);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            t.push(s, &[s, 1.0 - s, 0.0]);
        }
        let r = dwell_times(&t, &vertex(3, 1), 0.5).unwrap();
        // ‖(s,1−s,0) − e₁‖ = √2 (1 − s) = 0.5
        let expected = 1.0 - 0.5 / 2f64.sqrt();
        assert!((r.entries[0].0 - expected).abs() < 1e-6);
    }

    #[test]
    fn may_leonard_visits_grow() {
        let s = presets::may_leonard(0.8, 1.3, 0.0);
        let traj = integrate_ode(&s, &[0.5, 0.3, 0.2], 1500.0, 0.01).unwrap();
        for i in 1..=3 {
            let r = dwell_times(&traj, &vertex(3, i), 0.5).unwrap();
            let pairs = r.pairs();
            assert!(pairs.len() >= 4, "R{i}: {pairs:?}");
            for w in r.entries.windows(2) {
                assert!(w[0].0 < w[0].1.unwrap() && w[0].1.unwrap() < w[1].0);
            }
            let durations: Vec<f64> = pairs.iter().map(|(a, b)| b - a).collect();
            assert!(durations.windows(2).all(|w| w[1] > 1.5 * w[0]));
            let ratios: Vec<f64> = pairs.windows(2).map(|w| w[1].1 / w[0].1).collect();
            assert!(ratios.iter().all(|r| *r > 1.0));
        }
    }

    #[test]
    fn periodic_control_has_steady_fractions() {
        // θ = 0: closed orbits, visits of constant length at a constant period
        let s = presets::may_leonard(0.9, 1.1, 0.0);
        let traj = integrate_ode(&s, &[0.3, 0.6, 0.1], 3000.0, 0.01).unwrap();
        let r = dwell_times(&traj, &vertex(3, 1), 0.5).unwrap();
        let pairs = r.pairs();
        assert!(pairs.len() >= 6, "{pairs:?}");
        let d: Vec<f64> = pairs[1..].iter().map(|(a, b)| b - a).collect();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(hi / lo < 1.01);
        let f = dwell_fraction(&r).unwrap();
        assert!(f.iter().all(|v| *v > 0.0 && *v < 1.0));
        // per-visit fractions decay like 1/T_out; the occupation ratio settles
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        let occ: Vec<f64> = pairs.iter().map(|(_, b)| r.occupation(*b) / b).collect();
        let n = occ.len();
        assert!((occ[n - 1] / occ[n - 2] - 1.0).abs() < 0.05, "{occ:?}");
        assert!(occ[n - 1] > 0.05 && occ[n - 1] < 0.95);
    }

    #[test]
    fn clock_occupation_matches_sampled_indicator() {
        let det = presets::may_leonard(0.8, 1.3, 0.0);
        let s = presets::may_leonard(0.8, 1.3, 0.05);
        let y0 = [0.5, 0.3, 0.2];
        let traj = integrate_ode(&det, &y0, 200.0, 0.01).unwrap();
        let rec = dwell_times(&traj, &vertex(3, 1), 0.5).unwrap();
        let path = sample_path(3, 0.0, 150.0, 0.01).unwrap();
        let clock = TimeChangedClock::new(&s.logistic(), &path, 1.0, 150.0).unwrap();
        let exact = clock_occupation(&clock, &rec.entries, 150.0).unwrap();
        let phi = decomposed_trajectory(&s, &path, &y0, 1.0, 150.0).unwrap();
        let inside: Vec<f64> = phi
            .states()
            .map(|y| if offset(&vertex(3, 1), 0.5, y) < 0.0 { 1.0 } else { 0.0 })
            .collect();
        let sampled = crate::logistic::trapezoid(&inside, 0.01);
        assert!((exact - sampled).abs() < 0.05, "{exact} {sampled}");
    }

    #[test]
    fn deterministic_gap() {
        let s = presets::may_leonard(0.8, 1.3, 0.0);
        let opts = TurbulenceOptions {
            horizon: 1500.0,
            ..TurbulenceOptions::default()
        };
        let rep = nonunique_time_averages(&s, &[0.5, 0.3, 0.2], &opts).unwrap();
        assert!(rep.rows.len() >= 3);
        for r in &rep.rows[1..] {
            assert!(r.det_avg_at_tout - r.det_avg_at_sout > 0.04);
            assert!(r.t_in < r.t_out && r.t_out < r.s_out);
        }
        let mut buf = Vec::new();
        write_csv(&rep.rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,T_in,T_out,fraction,avg_at_Tout,avg_at_Sout"));
    }

    #[test]
    fn too_short_horizon() {
        let s = presets::may_leonard(0.8, 1.3, 0.0);
        let opts = TurbulenceOptions {
            horizon: 20.0,
            ..TurbulenceOptions::default()
        };
        assert!(matches!(
            nonunique_time_averages(&s, &[0.5, 0.3, 0.2], &opts),
            Err(Error::Insufficient(_))
        ));
    }
}
