//! Structural classification of three-species competitive systems.
//!
//! With competition coefficients `c = −A`, indices taken mod 3:
//! `αᵢ = c_{i+1,i+1} − c_{i,i+1}`, `βᵢ = c_{i,i−1} − c_{i−1,i−1}` and
//! `θ = β₁β₂β₃ − α₁α₂α₃`. Nontrivial periodic orbits exist iff `θ = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{equilibria, EquilibriumCensus, Stability};
use crate::error::{invalid, Error, Result};
use crate::lv::{integrate_ode, LVSystem};
use crate::omega::{omega_limit_classify_with, OmegaLimit, OmegaOptions};

fn require_three(system: &LVSystem) -> Result<()> {
    if system.n() != 3 {
        return Err(invalid("n", format!("classification needs 3 species, got {}", system.n())));
    }
    Ok(())
}

pub fn alphas_betas(system: &LVSystem) -> Result<([f64; 3], [f64; 3])> {
    require_three(system)?;
    let c = |i: usize, j: usize| system.competition(i % 3, j % 3);
    let mut alpha = [0.0; 3];
    let mut beta = [0.0; 3];
    for i in 0..3 {
        alpha[i] = c(i + 1, i + 1) - c(i, i + 1);
        beta[i] = c(i, i + 2) - c(i + 2, i + 2);
    }
    Ok((alpha, beta))
}

pub fn theta_of(alpha: &[f64; 3], beta: &[f64; 3]) -> f64 {
    beta[0] * beta[1] * beta[2] - alpha[0] * alpha[1] * alpha[2]
}

pub fn theta(system: &LVSystem) -> Result<f64> {
    let (a, b) = alphas_betas(system)?;
    Ok(theta_of(&a, &b))
}

/// Tolerance for deciding `θ = 0`: tight when every matrix entry is a
/// short dyadic fraction, so that the arithmetic is exact.
pub fn theta_tolerance(system: &LVSystem) -> f64 {
    let exact = system.a.iter().all(|v| (v * 1048576.0).fract() == 0.0 && v.abs() < 1048576.0);
    if exact {
        1e-12
    } else {
        1e-9
    }
}

/// `V(y) = y₁^μ y₂^ν y₃^ω (c₁y₁ + c₂y₂ + c₃y₃)`, conserved when `θ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeInvariant {
    pub mu: f64,
    pub nu: f64,
    pub omega_exp: f64,
    pub d: f64,
    pub coefficients: [f64; 3],
}

impl ConeInvariant {
    pub fn value(&self, y: &[f64]) -> f64 {
        let lin: f64 = self.coefficients.iter().zip(y).map(|(c, v)| c * v).sum();
        y[0].powf(self.mu) * y[1].powf(self.nu) * y[2].powf(self.omega_exp) * lin
    }

    pub fn exponent_sum(&self) -> f64 {
        self.mu + self.nu + self.omega_exp
    }
}

pub fn cone_params_of(alpha: &[f64; 3], beta: &[f64; 3]) -> Result<ConeInvariant> {
    let d = beta[1] * beta[2] + beta[1] * alpha[0] + alpha[0] * alpha[2];
    let scale = beta[1].abs() * beta[2].abs() + beta[1].abs() * alpha[0].abs() + alpha[0].abs() * alpha[2].abs();
    if d == 0.0 || d.abs() <= 1e-14 * scale {
        return Err(Error::Degenerate("D = 0: the cone surface is undefined".into()));
    }
    let inv = ConeInvariant {
        mu: -beta[1] * beta[2] / d,
        nu: -alpha[0] * alpha[2] / d,
        omega_exp: -alpha[0] * beta[1] / d,
        d,
        coefficients: [beta[1] * alpha[2], alpha[0] * alpha[2], beta[0] * beta[1]],
    };
    debug_assert!((inv.exponent_sum() + 1.0).abs() < 1e-9);
    Ok(inv)
}

pub fn cone_params(system: &LVSystem) -> Result<ConeInvariant> {
    let (a, b) = alphas_betas(system)?;
    cone_params_of(&a, &b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    AllToEquilibria,
    PeriodicFamily,
    HeteroclinicAttracting,
    MixedUnknown,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyBudget {
    pub interior_points: usize,
    pub boundary_points: usize,
    /// Horizon per sampled trajectory, in units of `1/r`.
    pub horizon_r: f64,
    pub step: f64,
    /// Cap on the total number of RK4 steps across all samples.
    pub max_steps: u64,
    pub omega: OmegaOptions,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        Self {
            interior_points: 15,
            boundary_points: 9,
            horizon_r: 1200.0,
            step: 0.01,
            max_steps: 10_000_000,
            omega: OmegaOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleOutcome {
    pub start: Vec<f64>,
    pub interior: bool,
    pub omega: OmegaLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub alphas: [f64; 3],
    pub betas: [f64; 3],
    pub theta: f64,
    pub theta_interval: [f64; 2],
    pub equilibria: EquilibriumCensus,
    pub cone: Option<ConeInvariant>,
    pub category: Category,
    pub certificates: Vec<String>,
    pub samples: Vec<SampleOutcome>,
    pub budget_exhausted: bool,
}

/// Lattice points of the simplex: `count` interior points taken from the
/// smallest interior lattice holding them, and boundary points spread
/// evenly over the three edges.
pub fn simplex_samples(interior: usize, boundary: usize) -> Vec<(Vec<f64>, bool)> {
    let mut out = Vec::new();
    if interior > 0 {
        let mut m = 3;
        while (m - 1) * (m - 2) / 2 < interior {
            m += 1;
        }
        'outer: for i in 1..m {
            for j in 1..m - i {
                let k = m - i - j;
                out.push((vec![i as f64 / m as f64, j as f64 / m as f64, k as f64 / m as f64], true));
                if out.len() == interior {
                    break 'outer;
                }
            }
        }
    }
    let per_edge = boundary.div_ceil(3);
    let mut placed = 0;
    for e in 0..3 {
        for q in 1..=per_edge {
            if placed == boundary {
                break;
            }
            let s = q as f64 / (per_edge + 1) as f64;
            let mut y = vec![0.0; 3];
            y[e] = s;
            y[(e + 1) % 3] = 1.0 - s;
            out.push((y, false));
            placed += 1;
        }
    }
    out
}

pub fn classify(system: &LVSystem, budget: &ClassifyBudget) -> Result<ClassificationReport> {
    require_three(system)?;
    if !system.is_competitive() {
        return Err(invalid("A", "classification needs a competitive matrix (all a_ij < 0)"));
    }
    let (alphas, betas) = alphas_betas(system)?;
    let th = theta_of(&alphas, &betas);
    let tol = theta_tolerance(system);
    let census = equilibria(system)?;
    let cone = cone_params_of(&alphas, &betas).ok();
    let deterministic = system.with_noise(0.0, system.calculus);

    let horizon = budget.horizon_r / system.r;
    let per_sample = (horizon / budget.step).ceil() as u64;
    let starts = simplex_samples(budget.interior_points, budget.boundary_points);
    let affordable = if per_sample == 0 {
        starts.len()
    } else {
        ((budget.max_steps / per_sample) as usize).min(starts.len())
    };
    let budget_exhausted = affordable < starts.len();
    let samples: Vec<SampleOutcome> = starts[..affordable]
        .par_iter()
        .map(|(y0, interior)| {
            let omega = integrate_ode(&deterministic, y0, horizon, budget.step)
                .and_then(|traj| omega_limit_classify_with(&traj, &budget.omega))
                .unwrap_or(OmegaLimit::Unknown);
            SampleOutcome {
                start: y0.clone(),
                interior: *interior,
                omega,
            }
        })
        .collect();

    let mut certificates = vec![
        format!("alpha = ({:.6}, {:.6}, {:.6})", alphas[0], alphas[1], alphas[2]),
        format!("beta = ({:.6}, {:.6}, {:.6})", betas[0], betas[1], betas[2]),
        format!("theta = {th:.3e} +/- {tol:.0e}"),
    ];
    let theta_zero = th.abs() <= tol;
    let interior_eq = census.interior();
    let has_interior = interior_eq.is_some()
        || census
            .continua
            .iter()
            .any(|c| c.support.len() == 3 && c.particular.iter().all(|v| *v > 0.0));
    let interior_samples: Vec<&SampleOutcome> = samples.iter().filter(|s| s.interior).collect();
    let count = |label: &str| interior_samples.iter().filter(|s| s.omega.label() == label).count();
    let periodic = count("periodic");
    let heteroclinic = count("heteroclinic_like");
    let all_converge = !samples.is_empty() && samples.iter().all(|s| s.omega.label() == "converges_to_equilibrium");
    let axial_saddles = census.axial().count() == 3 && census.axial().all(|e| e.stability == Stability::Saddle);
    let p_unstable = interior_eq.is_some_and(|e| matches!(e.stability, Stability::Saddle | Stability::Source));
    if let Some(e) = interior_eq {
        certificates.push(format!("interior equilibrium {:?} is {:?}", e.point, e.stability));
    }
    if census.has_continuum() {
        certificates.push(format!("{} continuum/continua of equilibria", census.continua.len()));
    }
    certificates.push(format!(
        "{} sampled trajectories: {} interior periodic, {} interior heteroclinic-like",
        samples.len(),
        periodic,
        heteroclinic
    ));

    let category = if budget_exhausted {
        certificates.push(format!("budget exhausted after {affordable} of {} samples", starts.len()));
        Category::MixedUnknown
    } else if theta_zero && has_interior && periodic > 0 {
        Category::PeriodicFamily
    } else if th > tol && axial_saddles && p_unstable && 2 * heteroclinic >= interior_samples.len().max(1) {
        Category::HeteroclinicAttracting
    } else if all_converge {
        Category::AllToEquilibria
    } else {
        Category::MixedUnknown
    };
    Ok(ClassificationReport {
        alphas,
        betas,
        theta: th,
        theta_interval: [th - tol, th + tol],
        equilibria: census,
        cone,
        category,
        certificates,
        samples,
        budget_exhausted,
    })
}
