//! Built-in systems.

use serde::Serialize;

use crate::logistic::Calculus;
use crate::lv::LVSystem;

/// Symmetric May–Leonard system with competition `(1, α, β)` cyclically,
/// `r = 1`, Stratonovich noise of intensity `sigma`.
pub fn may_leonard(alpha: f64, beta: f64, sigma: f64) -> LVSystem {
    let c = vec![
        vec![1.0, alpha, beta],
        vec![beta, 1.0, alpha],
        vec![alpha, beta, 1.0],
    ];
    LVSystem::competitive(1.0, &c, sigma, Calculus::Stratonovich).expect("valid preset")
}

/// Three species sharing one per-capita rate `1 − y₁ − y₂ − y₃`; the simplex
/// is a continuum of equilibria.
pub fn example_4_1(sigma: f64) -> LVSystem {
    LVSystem::competitive(1.0, &vec![vec![1.0; 3]; 3], sigma, Calculus::Stratonovich).expect("valid preset")
}

/// Competitive system whose equilibria form the segment `(a, a, 1 − 3a)`.
pub fn example_4_2(sigma: f64) -> LVSystem {
    let c = vec![
        vec![2.0, 1.0, 1.0],
        vec![1.0, 2.0, 1.0],
        vec![1.5, 1.5, 1.0],
    ];
    LVSystem::competitive(1.0, &c, sigma, Calculus::Stratonovich).expect("valid preset")
}

/// Prey–predator system with invariant cone surfaces
/// `y₁y₂y₃ / (2y₁ + 3y₂ + 2y₃)³ = h`.
pub fn example_4_3(sigma: f64) -> LVSystem {
    let a = vec![
        vec![-1.0, 2.0, -3.0],
        vec![-3.0, -1.0, 1.0],
        vec![1.0, -4.0, -1.0],
    ];
    LVSystem::new(1.0, &a, sigma, Calculus::Stratonovich).expect("valid preset")
}

/// Four-species prey–predator system with two limit cycles, `r = 2`.
pub fn example_4_4(sigma: f64) -> LVSystem {
    let a = vec![
        vec![-0.75, 1.0, -1.5, -2.0],
        vec![3.0, -3.0, -16.5, -4.0],
        vec![2959.0 / 4000.0, 0.0, -4.5, -989.0 / 125.0],
        vec![0.5, -1.0, -3.0, -6.0],
    ];
    LVSystem::new(2.0, &a, sigma, Calculus::Stratonovich).expect("valid preset")
}

/// Conserved ratio of [`example_4_3`].
pub fn example_4_3_invariant(y: &[f64]) -> f64 {
    let s = 2.0 * y[0] + 3.0 * y[1] + 2.0 * y[2];
    y[0] * y[1] * y[2] / (s * s * s)
}

#[derive(Clone, Debug, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub sigma: f64,
    pub y0: Vec<f64>,
    #[serde(skip)]
    pub system: LVSystem,
}

/// The preset inventory, in a fixed order.
pub fn all() -> Vec<Preset> {
    vec![
        Preset {
            name: "example-4.1",
            description: "continuum of equilibria on the standard simplex",
            sigma: 0.5,
            y0: vec![0.2, 0.3, 0.1],
            system: example_4_1(0.5),
        },
        Preset {
            name: "example-4.2",
            description: "segment of equilibria (a, a, 1-3a)",
            sigma: 0.5,
            y0: vec![0.2, 0.3, 0.1],
            system: example_4_2(0.5),
        },
        Preset {
            name: "example-4.3",
            description: "prey-predator system with invariant cone surfaces and closed orbits",
            sigma: 0.2,
            y0: vec![0.3, 0.25, 0.45],
            system: example_4_3(0.2),
        },
        Preset {
            name: "example-4.4",
            description: "four species, unique equilibrium and two limit cycles",
            sigma: 0.2,
            y0: vec![0.5, 0.1, 0.1, 0.1],
            system: example_4_4(0.2),
        },
        Preset {
            name: "may-leonard-0.8-1.3",
            description: "symmetric May-Leonard system with an attracting heteroclinic cycle",
            sigma: 0.05,
            y0: vec![0.5, 0.3, 0.2],
            system: may_leonard(0.8, 1.3, 0.05),
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory() {
        let names: Vec<_> = all().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 5);
        assert!(names.contains(&"may-leonard-0.8-1.3"));
        assert!(find("example-4.3").is_some());
        assert!(find("nope").is_none());
    }

    #[test]
    fn competitive_flags() {
        assert!(may_leonard(0.8, 1.3, 0.0).is_competitive());
        assert!(example_4_1(0.0).is_competitive());
        assert!(!example_4_3(0.0).is_competitive());
    }

    #[test]
    fn cone_level_at_interior_equilibrium() {
        let h = example_4_3_invariant(&[3.0 / 8.0, 0.25, 3.0 / 8.0]);
        assert!((h - 1.0 / 324.0).abs() < 1e-15);
    }
}
