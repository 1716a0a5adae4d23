//! TOML experiment configuration with a strict schema.
//!
//! Every table rejects unknown keys. Validation errors name the offending
//! field with its table prefix, e.g. `system.r`.

use serde::{Deserialize, Serialize};

use crate::classify3d::ClassifyBudget;
use crate::error::{Error, Result};
use crate::experiments::{DecomposeCheckOptions, EquilibriumSampleOptions, PullbackOptions};
use crate::logistic::Calculus;
use crate::lv::LVSystem;
use crate::measures::SamplingOptions;
use crate::presets;
use crate::turbulence::TurbulenceOptions;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<String>,
    pub system: Option<SystemSpec>,
    pub simulate: SimulateConfig,
    pub decompose_check: DecomposeCheckConfig,
    pub pullback: PullbackConfig,
    pub stationary: StationaryConfig,
    pub sweep_sigma: SweepConfig,
    pub classify: ClassifyConfig,
    pub turbulence: TurbulenceConfig,
}

/// Either a preset name, explicit coefficients, or a preset with overrides.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSpec {
    pub preset: Option<String>,
    pub r: Option<f64>,
    /// Signed interaction matrix: `dyᵢ = yᵢ(r + Σ aᵢⱼ yⱼ)dt + …`.
    pub a: Option<Vec<Vec<f64>>>,
    /// Competition matrix `c = −a` (positive entries).
    pub competition: Option<Vec<Vec<f64>>>,
    pub sigma: Option<f64>,
    pub calculus: Option<Calculus>,
    pub y0: Option<Vec<f64>>,
}

impl SystemSpec {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.into()),
            ..Self::default()
        }
    }

    /// Builds the system and initial state, naming any invalid field.
    pub fn build(&self) -> Result<(LVSystem, Vec<f64>)> {
        let base = match &self.preset {
            Some(name) => Some(presets::find(name).ok_or_else(|| Error::Config {
                field: "system.preset".into(),
                reason: format!(
                    "unknown preset `{name}`; available: {}",
                    presets::all().iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
                ),
            })?),
            None => None,
        };
        if self.a.is_some() && self.competition.is_some() {
            return Err(Error::Config {
                field: "system.a".into(),
                reason: "give either `a` or `competition`, not both".into(),
            });
        }
        let rows = match (&self.a, &self.competition, &base) {
            (Some(a), _, _) => a.clone(),
            (None, Some(c), _) => c.iter().map(|row| row.iter().map(|v| -v).collect()).collect(),
            (None, None, Some(p)) => {
                let a = &p.system.a;
                (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
            }
            (None, None, None) => {
                return Err(Error::Config {
                    field: "system".into(),
                    reason: "need `preset`, `a` or `competition`".into(),
                })
            }
        };
        let field = if self.competition.is_some() { "competition" } else { "a" };
        let r = self.r.or(base.as_ref().map(|p| p.system.r)).ok_or_else(|| Error::Config {
            field: "system.r".into(),
            reason: "missing growth rate".into(),
        })?;
        let sigma = self.sigma.or(base.as_ref().map(|p| p.sigma)).unwrap_or(0.0);
        let calculus = self
            .calculus
            .or(base.as_ref().map(|p| p.system.calculus))
            .unwrap_or(Calculus::Stratonovich);
        if !(sigma >= 0.0) {
            return Err(Error::Config {
                field: "system.sigma".into(),
                reason: format!("noise intensity must be nonnegative, got {sigma}"),
            });
        }
        let system = LVSystem::new(r, &rows, sigma, calculus).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Config {
                field: format!("system.{}", if name == "A" { field } else { name }),
                reason,
            },
            other => other,
        })?;
        let y0 = match (&self.y0, &base) {
            (Some(y), _) => y.clone(),
            (None, Some(p)) if p.y0.len() == system.n() => p.y0.clone(),
            _ => vec![1.0 / system.n() as f64 + 0.05; system.n()],
        };
        if y0.len() != system.n() || y0.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config {
                field: "system.y0".into(),
                reason: format!("need {} finite nonnegative components", system.n()),
            });
        }
        Ok((system, y0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimScheme {
    Ode,
    Euler,
    Milstein,
    Decomposition,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub scheme: SimScheme,
    pub horizon: f64,
    pub step: f64,
    pub g0: f64,
    /// Keep every k-th grid point in the output.
    pub output_every: usize,
    /// Largest tolerated clamp rate per 10⁴ steps under `--check`.
    pub max_clamps_per_10k: f64,
    pub path_dump: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            scheme: SimScheme::Decomposition,
            horizon: 50.0,
            step: 0.01,
            g0: 1.0,
            output_every: 10,
            max_clamps_per_10k: 1.0,
            path_dump: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeCheckConfig {
    #[serde(flatten)]
    pub options: DecomposeCheckOptions,
    pub max_deviation: f64,
    pub milstein_band: [f64; 2],
    pub euler_band: [f64; 2],
    /// Whether `--check` applies the two refinement-ratio bands.
    pub check_ratios: bool,
    pub invariant_deterministic: f64,
    pub invariant_stochastic: f64,
}

impl Default for DecomposeCheckConfig {
    fn default() -> Self {
        Self {
            options: DecomposeCheckOptions {
                ensemble: 32,
                ..DecomposeCheckOptions::default()
            },
            max_deviation: 1e-2,
            milstein_band: [1.5, 3.0],
            euler_band: [1.2, 2.8],
            check_ratios: true,
            invariant_deterministic: 1e-6,
            invariant_stochastic: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackConfig {
    #[serde(flatten)]
    pub options: PullbackOptions,
    pub tolerance: f64,
}

impl Default for PullbackConfig {
    fn default() -> Self {
        Self {
            options: PullbackOptions::default(),
            tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Ray,
    Cone,
    Axes,
    BoundaryPlanes,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryConfig {
    pub horizon: f64,
    pub burn_in: Option<f64>,
    pub path_count: usize,
    pub sampling: SamplingOptions,
    pub geometry: GeometryKind,
    pub tolerance: f64,
    /// Horizon ladder for the support diagnostics (axes and face masses).
    pub horizons: Vec<f64>,
    /// Scalar systems: draws of the random equilibrium.
    pub equilibrium: EquilibriumSampleOptions,
    pub replications: usize,
    pub min_mass: f64,
    pub max_ks: f64,
    /// Level `h` of the cone surface for [`GeometryKind::Cone`] (Example 4.3
    /// family); taken from `y0` when absent.
    pub cone_level: Option<f64>,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            burn_in: None,
            path_count: 100,
            sampling: SamplingOptions::default(),
            geometry: GeometryKind::Ray,
            tolerance: 1e-3,
            horizons: vec![200.0, 400.0, 800.0],
            equilibrium: EquilibriumSampleOptions::default(),
            replications: 1,
            min_mass: 0.99,
            max_ks: 0.03,
            cone_level: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTargetKind {
    Equilibrium,
    Orbit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sigmas: Vec<f64>,
    pub target: SweepTargetKind,
    pub horizon: f64,
    pub burn_in: Option<f64>,
    pub path_count: usize,
    pub replications: usize,
    pub sampling: SamplingOptions,
    pub ball_radius: f64,
    /// Time the deterministic flow runs before the orbit is traced.
    pub orbit_settle: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.4, 0.2, 0.1],
            target: SweepTargetKind::Orbit,
            horizon: 30.0,
            burn_in: Some(10.0),
            path_count: 1,
            replications: 10,
            sampling: SamplingOptions {
                sample_interval: 0.05,
                ..SamplingOptions::default()
            },
            ball_radius: 0.1,
            orbit_settle: 50.0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(flatten)]
    pub budget: ClassifyBudget,
    /// Category required under `--check`.
    pub expect: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbulenceConfig {
    #[serde(flatten)]
    pub options: TurbulenceOptions,
    pub fraction_band: [f64; 2],
    pub min_gap: f64,
    /// Number of trailing visits whose fractions must lie in the band.
    pub late_cycles: usize,
}

impl Default for TurbulenceConfig {
    fn default() -> Self {
        Self {
            options: TurbulenceOptions::default(),
            fraction_band: [0.39, 0.45],
            min_gap: 0.04,
            late_cycles: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config {
            field: e
                .span()
                .map(|s| format!("bytes {}..{}", s.start, s.end))
                .unwrap_or_else(|| "config".into()),
            reason: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not need the system.
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config {
                    field: field.into(),
                    reason: format!("must be positive, got {v}"),
                })
            }
        };
        positive("simulate.horizon", self.simulate.horizon)?;
        positive("simulate.step", self.simulate.step)?;
        positive("decompose_check.horizon", self.decompose_check.options.horizon)?;
        positive("decompose_check.step", self.decompose_check.options.step)?;
        positive("stationary.horizon", self.stationary.horizon)?;
        positive("stationary.sampling.step", self.stationary.sampling.step)?;
        positive("stationary.tolerance", self.stationary.tolerance)?;
        positive("sweep_sigma.horizon", self.sweep_sigma.horizon)?;
        positive("turbulence.horizon", self.turbulence.options.horizon)?;
        positive("turbulence.radius", self.turbulence.options.radius)?;
        positive("pullback.step", self.pullback.options.step)?;
        if self.pullback.options.times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config {
                field: "pullback.times".into(),
                reason: "times must be positive".into(),
            });
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::Config {
                    field: "threads".into(),
                    reason: "must be positive".into(),
                });
            }
        }
        Ok(())
    }
}
