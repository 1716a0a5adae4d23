//! Numerical laboratory for Lotka–Volterra systems driven by common
//! multiplicative white noise.
//!
//! The central object is the decomposition
//!
//! ```text
//! Φ(t, ω, y) = g(t, ω, g₀) · Ψ(∫₀ᵗ g(s, ω, g₀) ds, y / g₀)
//! ```
//!
//! of the stochastic flow `Φ` into the scalar logistic factor `g` and the
//! deterministic flow `Ψ` run on a random clock. Around it the crate provides
//! shared Brownian paths, direct SDE integrators used as independent checks,
//! empirical stationary measures, a classifier for 3D competitive systems and
//! the heteroclinic dwell-time experiments.

pub mod classify3d;
pub mod cli;
pub mod config;
pub mod decomposition;
pub mod equilibria;
pub mod error;
pub mod experiments;
pub mod logistic;
pub mod lv;
pub mod measures;
pub mod omega;
pub mod paths;
pub mod presets;
pub mod sde;
pub mod seed;
pub mod special;
pub mod turbulence;

pub use error::{Error, Result};
pub use logistic::{Calculus, LogisticParams};
pub use lv::{LVSystem, Trajectory};
pub use paths::BrownianPath;
