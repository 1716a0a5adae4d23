//! End-to-end experiments shared by the `slv` binary and the test suites.
//! Each returns a serializable report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify3d::{cone_params, theta, theta_tolerance};
use crate::decomposition::{decomposed_trajectory, phi_pullback};
use crate::error::{invalid, Error, Result};
use crate::logistic::{g_series, stationary_cdf, u_random_equilibrium, LogisticParams};
use crate::lv::{distance, integrate_ode, LVSystem, Trajectory};
use crate::measures::{
    empirical_time_average, ks_distance, support_diagnostics, EmpiricalMeasure, Geometry, MassReport, RayLaw,
    SamplingOptions,
};
use crate::omega::{omega_limit_classify, OmegaLimit};
use crate::paths::{sample_path, BrownianPath};
use crate::sde::{integrate, Scheme, SdeOptions};
use crate::seed::derive_seed;

fn max_relative_deviation(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states()
        .zip(b.states())
        .map(|(x, y)| {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                distance(x, y)
            } else {
                distance(x, y) / norm
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeCheckOptions {
    pub horizon: f64,
    /// Coarsest step; each further level halves it by bridge refinement.
    pub step: f64,
    pub levels: usize,
    pub g0: f64,
    pub seed: u64,
    /// Number of paths; deviations are averaged over them. A single path
    /// uses `seed` itself.
    pub ensemble: usize,
    /// Horizon and RK4 step of the conserved-quantity check.
    pub invariant_horizon: f64,
    pub invariant_step: f64,
}

impl Default for DecomposeCheckOptions {
    fn default() -> Self {
        Self {
            horizon: 5.0,
            step: 1e-3,
            levels: 3,
            g0: 1.0,
            seed: 0,
            ensemble: 1,
            invariant_horizon: 50.0,
            invariant_step: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecomposeLevel {
    pub step: f64,
    /// Max over the grid of `‖Φ − Y‖/‖Y‖` against each direct scheme.
    pub milstein_deviation: f64,
    pub euler_deviation: f64,
    pub milstein_clamps: usize,
    pub euler_clamps: usize,
    /// Scalar systems only: max relative error of each scheme against the
    /// exact logistic solution.
    pub milstein_exact_error: Option<f64>,
    pub euler_exact_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantDrift {
    pub theta: f64,
    pub deterministic: f64,
    pub stochastic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecomposeReport {
    pub levels: Vec<DecomposeLevel>,
    /// `deviation(h)/deviation(h/2)` between consecutive levels.
    pub milstein_ratios: Vec<f64>,
    pub euler_ratios: Vec<f64>,
    pub invariant: Option<InvariantDrift>,
}

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Pathwise comparison of the decomposition with direct Milstein and
/// Euler–Maruyama integration on one Brownian path refined `levels − 1`
/// times.
pub fn decompose_check(system: &LVSystem, y0: &[f64], opts: &DecomposeCheckOptions) -> Result<DecomposeReport> {
    if opts.levels == 0 {
        return Err(invalid("levels", "must be positive"));
    }
    if opts.ensemble == 0 {
        return Err(invalid("ensemble", "must be positive"));
    }
    let seeds: Vec<u64> = if opts.ensemble == 1 {
        vec![opts.seed]
    } else {
        (0..opts.ensemble as u64).map(|j| derive_seed(opts.seed, j)).collect()
    };
    let per_path = seeds
        .par_iter()
        .map(|&seed| check_one_path(system, y0, seed, opts))
        .collect::<Result<Vec<_>>>()?;
    let m = per_path.len() as f64;
    let levels: Vec<DecomposeLevel> = (0..opts.levels)
        .map(|k| {
            let col = |f: &dyn Fn(&DecomposeLevel) -> f64| per_path.iter().map(|p| f(&p[k])).sum::<f64>() / m;
            let opt_col = |f: &dyn Fn(&DecomposeLevel) -> Option<f64>| {
                per_path.iter().map(|p| f(&p[k])).sum::<Option<f64>>().map(|v| v / m)
            };
            DecomposeLevel {
                step: per_path[0][k].step,
                milstein_deviation: col(&|l| l.milstein_deviation),
                euler_deviation: col(&|l| l.euler_deviation),
                milstein_clamps: per_path.iter().map(|p| p[k].milstein_clamps).sum(),
                euler_clamps: per_path.iter().map(|p| p[k].euler_clamps).sum(),
                milstein_exact_error: opt_col(&|l| l.milstein_exact_error),
                euler_exact_error: opt_col(&|l| l.euler_exact_error),
            }
        })
        .collect();
    let md: Vec<f64> = levels.iter().map(|l| l.milstein_deviation).collect();
    let ed: Vec<f64> = levels.iter().map(|l| l.euler_deviation).collect();

    let invariant = if system.n() == 3 && y0.iter().all(|v| *v > 0.0) {
        match (theta(system), cone_params(system)) {
            (Ok(th), Ok(cone)) if th.abs() <= theta_tolerance(system) => {
                let v0 = cone.value(y0);
                let drift = |t: &Trajectory| t.states().map(|y| (cone.value(y) - v0).abs() / v0.abs()).fold(0.0, f64::max);
                let det = integrate_ode(
                    &system.with_noise(0.0, system.calculus),
                    y0,
                    opts.invariant_horizon,
                    opts.invariant_step,
                )?;
                let p = sample_path(opts.seed, 0.0, opts.invariant_horizon, opts.invariant_step)?;
                let phi = decomposed_trajectory(system, &p, y0, opts.g0, opts.invariant_horizon)?;
                Some(InvariantDrift {
                    theta: th,
                    deterministic: drift(&det),
                    stochastic: drift(&phi),
                })
            }
            _ => None,
        }
    } else {
        None
    };
    Ok(DecomposeReport {
        levels,
        milstein_ratios: ratios(&md),
        euler_ratios: ratios(&ed),
        invariant,
    })
}

fn check_one_path(system: &LVSystem, y0: &[f64], seed: u64, opts: &DecomposeCheckOptions) -> Result<Vec<DecomposeLevel>> {
    let sde_opts = SdeOptions::default();
    let mut path = sample_path(seed, 0.0, opts.horizon, opts.step)?;
    let mut levels = Vec::new();
    for level in 0..opts.levels {
        if level > 0 {
            path = path.refine();
        }
        let phi = decomposed_trajectory(system, &path, y0, opts.g0, opts.horizon)?;
        let mil = integrate(Scheme::Milstein, system, &path, y0, opts.horizon, sde_opts)?;
        let em = integrate(Scheme::EulerMaruyama, system, &path, y0, opts.horizon, sde_opts)?;
        let (mut me, mut ee) = (None, None);
        if system.n() == 1 && y0[0] > 0.0 {
            let exact = g_series(&system.logistic(), &path, y0[0], opts.horizon)?;
            let err = |t: &Trajectory| {
                t.states()
                    .zip(&exact)
                    .map(|(y, g)| (y[0] - g).abs() / g)
                    .fold(0.0, f64::max)
            };
            me = Some(err(&mil.trajectory));
            ee = Some(err(&em.trajectory));
        }
        levels.push(DecomposeLevel {
            step: path.step(),
            milstein_deviation: max_relative_deviation(&phi, &mil.trajectory),
            euler_deviation: max_relative_deviation(&phi, &em.trajectory),
            milstein_clamps: mil.clamps,
            euler_clamps: em.clamps,
            milstein_exact_error: me,
            euler_exact_error: ee,
        });
    }
    Ok(levels)
}

/// Limit point of the deterministic flow from `y0`.
pub fn deterministic_limit(system: &LVSystem, y0: &[f64], horizon: f64) -> Result<Vec<f64>> {
    let det = system.with_noise(0.0, system.calculus);
    let traj = integrate_ode(&det, y0, horizon, 0.01)?;
    match omega_limit_classify(&traj, 0.5)? {
        OmegaLimit::ConvergesToEquilibrium { point } => Ok(point),
        other => Err(Error::Insufficient(format!(
            "deterministic trajectory does not settle on an equilibrium ({})",
            other.label()
        ))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackOptions {
    pub times: Vec<f64>,
    pub seeds: usize,
    pub step: f64,
    pub g0: f64,
    pub seed: u64,
}

impl Default for PullbackOptions {
    fn default() -> Self {
        Self {
            times: vec![50.0, 100.0, 200.0],
            seeds: 20,
            step: 0.01,
            g0: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackRow {
    pub seed: u64,
    pub u: f64,
    pub u_insufficient: bool,
    /// `‖Φ(t, θ_{−t}ω, y0) − u(ω)·P‖` for each requested `t`.
    pub distances: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackReport {
    pub limit: Vec<f64>,
    pub times: Vec<f64>,
    pub rows: Vec<PullbackRow>,
}

/// Distance of pull-back states to `u(ω)·P`, with `P` the deterministic
/// limit of `y0` and `u` computed over the longest requested window.
pub fn pullback_convergence(system: &LVSystem, y0: &[f64], opts: &PullbackOptions) -> Result<PullbackReport> {
    let t_max = opts.times.iter().cloned().fold(0.0, f64::max);
    if !(t_max > 0.0) {
        return Err(invalid("times", "need at least one positive time"));
    }
    let limit = deterministic_limit(system, y0, 200.0)?;
    let params = system.logistic();
    let rows = (0..opts.seeds as u64)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(opts.seed, k);
            let path = sample_path(seed, -t_max, 0.0, opts.step)?;
            let u = u_random_equilibrium(&params, &path, t_max)?;
            let target: Vec<f64> = limit.iter().map(|p| u.value * p).collect();
            let distances = opts
                .times
                .iter()
                .map(|&t| Ok(distance(&phi_pullback(system, &path, y0, opts.g0, t)?, &target)))
                .collect::<Result<Vec<_>>>()?;
            Ok(PullbackRow {
                seed,
                u: u.value,
                u_insufficient: u.insufficient,
                distances,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PullbackReport {
        limit,
        times: opts.times.clone(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumSampleOptions {
    pub samples: usize,
    pub truncation: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for EquilibriumSampleOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            truncation: 40.0,
            step: 0.01,
            seed: 0,
        }
    }
}

/// Independent draws of the random equilibrium `u(ω)`, one path each.
pub fn random_equilibrium_samples(params: &LogisticParams, opts: &EquilibriumSampleOptions) -> Result<Vec<f64>> {
    (0..opts.samples as u64)
        .into_par_iter()
        .map(|k| {
            let path = BrownianPath::sample(derive_seed(opts.seed, k), -opts.truncation, 0.0, opts.step)?;
            Ok(u_random_equilibrium(params, &path, opts.truncation)?.value)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalarSummary {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub ks: f64,
}

pub fn summarize_scalar(params: &LogisticParams, values: &[f64]) -> Result<ScalarSummary> {
    if values.len() < 2 {
        return Err(Error::Insufficient("need at least two samples".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let ks = ks_distance(values, |x| stationary_cdf(params, x).unwrap_or(f64::NAN))?;
    Ok(ScalarSummary {
        samples: values.len(),
        mean,
        variance,
        ks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RayCheck {
    pub anchor: Vec<f64>,
    pub ray: MassReport,
    /// KS distance of the ray coordinate `min yᵢ/pᵢ` against the stationary law.
    pub radial_ks: f64,
}

/// Ray mass and radial KS of a measure whose support should be `L(P)`.
pub fn ray_check(system: &LVSystem, measure: &EmpiricalMeasure, anchor: &[f64], tolerance: f64) -> Result<RayCheck> {
    let law = RayLaw::new(anchor, system.logistic())?;
    let radial: Vec<f64> = measure.points().map(|y| law.radial(y)).collect();
    let params = system.logistic();
    let radial_ks = crate::measures::ks_distance_weighted(&radial, measure.weights(), |x| {
        stationary_cdf(&params, x.max(0.0)).unwrap_or(f64::NAN)
    })?;
    Ok(RayCheck {
        anchor: anchor.to_vec(),
        ray: support_diagnostics(measure, &Geometry::Ray(anchor.to_vec()), tolerance),
        radial_ks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub horizon: f64,
    pub samples: usize,
    pub axes: MassReport,
    pub planes: MassReport,
}

/// Axes and face-interior masses of the empirical measure for each horizon.
pub fn support_ladder(
    system: &LVSystem,
    y0: &[f64],
    horizons: &[f64],
    path_count: usize,
    tolerance: f64,
    sampling: &SamplingOptions,
) -> Result<Vec<LadderRow>> {
    horizons
        .iter()
        .map(|&t| {
            let m = empirical_time_average(system, y0, t, path_count, crate::measures::default_burn_in(t), sampling)?;
            Ok(LadderRow {
                horizon: t,
                samples: m.len(),
                axes: support_diagnostics(&m, &Geometry::Axes, tolerance),
                planes: support_diagnostics(&m, &Geometry::BoundaryPlanes, tolerance),
            })
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::Calculus;
    use crate::presets;

    #[test]
    fn median_cases() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn decompose_check_shapes() {
        let s = presets::example_4_3(0.2);
        let opts = DecomposeCheckOptions {
            horizon: 1.0,
            step: 1e-2,
            levels: 2,
            invariant_horizon: 5.0,
            invariant_step: 1e-2,
            ..Default::default()
        };
        let r = decompose_check(&s, &[0.3, 0.25, 0.45], &opts).unwrap();
        assert_eq!(r.levels.len(), 2);
        assert_eq!(r.milstein_ratios.len(), 1);
        let inv = r.invariant.unwrap();
        assert!(inv.deterministic < 1e-6 && inv.stochastic < 1e-4);
    }

    #[test]
    fn scalar_exact_errors_reported() {
        let s = LVSystem::new(1.0, &[vec![-1.0]], 0.5, Calculus::Stratonovich).unwrap();
        let opts = DecomposeCheckOptions {
            horizon: 1.0,
            step: 1e-2,
            levels: 2,
            ..Default::default()
        };
        let r = decompose_check(&s, &[0.5], &opts).unwrap();
        assert!(r.levels.iter().all(|l| l.milstein_exact_error.is_some()));
        assert!(r.invariant.is_none());
    }

    #[test]
    fn limit_of_example_4_1() {
        let p = deterministic_limit(&presets::example_4_1(0.5), &[0.2, 0.3, 0.1], 200.0).unwrap();
        assert!(distance(&p, &[1.0 / 3.0, 0.5, 1.0 / 6.0]) < 1e-9);
        assert!(deterministic_limit(&presets::may_leonard(0.8, 1.3, 0.0), &[0.5, 0.3, 0.2], 300.0).is_err());
    }
}
