//! Monte Carlo checks against closed-form moments and laws.

use rand::SeedableRng;
use rand_distr::{Distribution, Gamma};
use stochastic_lv::classify3d::cone_params;
use stochastic_lv::decomposition::{level_curve, ConeReference};
use stochastic_lv::experiments::{median, random_equilibrium_samples, EquilibriumSampleOptions};
use stochastic_lv::logistic::{stationary_cdf, time_average_g, time_average_g_pullback, LogisticParams};
use stochastic_lv::measures::{
    empirical_time_average, ks_distance, sigma_sweep, support_diagnostics, Geometry, SamplingOptions, SweepOptions,
    SweepTarget,
};
use stochastic_lv::paths::BrownianPath;
use stochastic_lv::presets;
use stochastic_lv::seed::derive_seed;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn unit_increments_are_standard_normal() {
    let n = 100_000;
    let inc: Vec<f64> = (0..n)
        .map(|k| {
            let p = BrownianPath::sample(derive_seed(1, k), 0.0, 1.0, 0.5).unwrap();
            p.value(1.0).unwrap() - p.value(0.0).unwrap()
        })
        .collect();
    let (m, v) = mean_var(&inc);
    assert!(m.abs() < 3.0 / (n as f64).sqrt(), "{m}");
    assert!((v - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn bridge_midpoints_have_quarter_variance() {
    let n = 100_000;
    let res: Vec<f64> = (0..n)
        .map(|k| {
            let p = BrownianPath::sample(derive_seed(2, k), 0.0, 1.0, 1.0).unwrap().refine();
            let (a, m, b) = (p.value(0.0).unwrap(), p.value(0.5).unwrap(), p.value(1.0).unwrap());
            m - 0.5 * (a + b)
        })
        .collect();
    let (_, v) = mean_var(&res);
    assert!((v - 0.25).abs() < 0.05 * 0.25, "{v}");
}

#[test]
fn random_equilibrium_has_unit_mean() {
    let params = LogisticParams::stratonovich(1.0, 1.0).unwrap();
    let u = random_equilibrium_samples(
        &params,
        &EquilibriumSampleOptions {
            seed: 404,
            ..EquilibriumSampleOptions::default()
        },
    )
    .unwrap();
    let (m, v) = mean_var(&u);
    let se = (v / u.len() as f64).sqrt();
    assert!((m - 1.0).abs() < 2.0 * se, "mean {m} se {se}");
}

#[test]
fn ergodic_time_averages_approach_one() {
    // a single T = 200 average has standard deviation ≈ √(2·Var·τ_c/T) ≈ 0.07
    let params = LogisticParams::stratonovich(1.0, 1.0).unwrap();
    let (mut fwd, mut back) = (Vec::new(), Vec::new());
    for k in 0..20 {
        let seed = derive_seed(12, k);
        let p = BrownianPath::sample(seed, 0.0, 200.0, 0.01).unwrap();
        fwd.push(time_average_g(&params, &p, 0.5, 200.0).unwrap());
        let p = BrownianPath::sample(seed, -200.0, 0.0, 0.01).unwrap();
        back.push(time_average_g_pullback(&params, &p, 0.5, 200.0).unwrap());
    }
    for v in [&fwd, &back] {
        let (m, _) = mean_var(v);
        assert!((m - 1.0).abs() < 0.05, "{m}");
        assert!(v.iter().all(|a| (a - 1.0).abs() < 0.3), "{v:?}");
    }
}

#[test]
fn ks_is_calibrated_on_the_true_law() {
    let params = LogisticParams::stratonovich(1.0, 1.0).unwrap();
    let law = Gamma::new(2.0, 0.5).unwrap();
    let n = 10_000;
    let mut d: Vec<f64> = (0..20)
        .map(|k| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(k);
            let x: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            ks_distance(&x, |v| stationary_cdf(&params, v).unwrap()).unwrap()
        })
        .collect();
    assert!(median(&mut d) < 1.63 / (n as f64).sqrt());
}

#[test]
fn radial_spread_halves_with_sigma() {
    // on the ray of Example 4.1 the coordinate sum is Gamma(k, k), k = 2r/σ²
    let y0 = [0.2, 0.3, 0.1];
    let mut stds = Vec::new();
    for sigma in [0.8, 0.4, 0.2] {
        let sampling = SamplingOptions {
            seed: 6,
            ..SamplingOptions::default()
        };
        let m = empirical_time_average(&presets::example_4_1(sigma), &y0, 400.0, 50, 40.0, &sampling).unwrap();
        let sums: Vec<f64> = m.points().map(|y| y.iter().sum()).collect();
        let (_, v) = mean_var(&sums);
        let sd = v.sqrt();
        assert!((sd / (sigma / 2f64.sqrt()) - 1.0).abs() < 0.15, "σ={sigma}: sd {sd}");
        stds.push(sd);
    }
    for w in stds.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.7..2.3).contains(&ratio), "{ratio}");
    }
}

#[test]
fn small_noise_concentrates_at_a_stable_equilibrium() {
    let system = presets::may_leonard(0.5, 0.7, 0.0);
    let p = 1.0 / 2.2;
    let target = SweepTarget::Equilibrium {
        point: vec![p; 3],
        ball_radius: 0.1,
    };
    let opts = SweepOptions {
        horizon: 200.0,
        burn_in: Some(40.0),
        path_count: 20,
        sampling: SamplingOptions {
            seed: 3,
            ..SamplingOptions::default()
        },
    };
    let rows = sigma_sweep(&system, &[0.5, 0.3, 0.2], &[0.8, 0.4, 0.2, 0.1], &target, &opts).unwrap();
    let mass: Vec<f64> = rows.iter().map(|r| r.ball_mass.unwrap()).collect();
    assert!(mass.windows(2).all(|w| w[1] > w[0]), "{mass:?}");
    assert!(*mass.last().unwrap() > 0.9, "{mass:?}");
}

#[test]
fn prey_predator_measure_lives_on_its_cone() {
    let system = presets::example_4_3(0.2);
    let y0 = [0.3, 0.25, 0.45];
    let v = cone_params(&presets::example_4_3(0.0)).unwrap();
    let center = [0.375, 0.25, 0.375];
    // V peaks at the interior equilibrium on each ray family
    let sign = if v.value(&center) > v.value(&y0) { 1.0 } else { -1.0 };
    let curve = level_curve(|y| sign * v.value(y), &center, sign * v.value(&y0), 720).unwrap();
    let geometry = Geometry::Cone(ConeReference::curve(&curve, true).unwrap());
    let sampling = SamplingOptions {
        seed: 10,
        ..SamplingOptions::default()
    };
    let m = empirical_time_average(&system, &y0, 100.0, 20, 20.0, &sampling).unwrap();
    let report = support_diagnostics(&m, &geometry, 1e-2);
    assert!(report.mass > 0.99, "{report:?}");
}
