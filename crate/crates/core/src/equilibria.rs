//! Equilibrium census by support enumeration.
//!
//! For every support `S ⊆ {0..n}` the system `r + Σ_{j∈S} a_ij y_j = 0`,
//! `i ∈ S`, is solved. Rank deficiency is detected on singular values with a
//! relative tolerance of `1e−9`; consistent singular supports are reported as
//! continua rather than points.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lv::LVSystem;

pub const RANK_TOL: f64 = 1e-9;
const STABILITY_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;
const MAX_DIM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Sink,
    Source,
    Saddle,
    CenterLike,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Equilibrium {
    pub point: Vec<f64>,
    pub support: Vec<usize>,
    /// Jacobian eigenvalues as `[re, im]` pairs.
    #[serde(serialize_with = "ser_complex")]
    pub eigenvalues: Vec<Complex<f64>>,
    pub stability: Stability,
}

fn ser_complex<S: serde::Serializer>(v: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl Equilibrium {
    pub fn is_interior(&self) -> bool {
        self.point.iter().all(|v| *v > 0.0)
    }

    pub fn is_origin(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_axial(&self) -> bool {
        self.support.len() == 1
    }
}

/// A family of equilibria `particular + Σ s_k·directions[k]` on one support.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumContinuum {
    pub support: Vec<usize>,
    pub particular: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub rank_deficiency: usize,
    /// Parameter interval keeping the family nonnegative; only computed for
    /// one-parameter families.
    pub segment: Option<(f64, f64)>,
}

impl EquilibriumContinuum {
    /// Point of a one-parameter family at parameter `s`.
    pub fn at(&self, s: f64) -> Vec<f64> {
        let d = &self.directions[0];
        self.particular.iter().zip(d).map(|(p, v)| p + s * v).collect()
    }

    /// Whether `y` satisfies the equations of this family.
    pub fn contains(&self, system: &LVSystem, y: &[f64]) -> bool {
        let n = system.n();
        let inside = |i: usize| self.support.contains(&i);
        let off_support = (0..n).filter(|i| !inside(*i)).all(|i| y[i].abs() < DEDUP_TOL);
        off_support
            && self
                .support
                .iter()
                .all(|&i| system.per_capita(y, i).abs() < 1e-7 * (1.0 + system.r))
            && y.iter().all(|v| *v >= -DEDUP_TOL)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EquilibriumCensus {
    pub isolated: Vec<Equilibrium>,
    pub continua: Vec<EquilibriumContinuum>,
}

impl EquilibriumCensus {
    pub fn interior(&self) -> Option<&Equilibrium> {
        self.isolated.iter().find(|e| e.is_interior())
    }

    pub fn axial(&self) -> impl Iterator<Item = &Equilibrium> {
        self.isolated.iter().filter(|e| e.is_axial())
    }

    pub fn has_continuum(&self) -> bool {
        !self.continua.is_empty()
    }
}

/// Classifies the linearization at `point`.
pub fn stability_of(eigenvalues: &[Complex<f64>]) -> Stability {
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = STABILITY_TOL * scale;
    let neg = eigenvalues.iter().filter(|z| z.re < -tol).count();
    let pos = eigenvalues.iter().filter(|z| z.re > tol).count();
    let zero: Vec<_> = eigenvalues.iter().filter(|z| z.re.abs() <= tol).collect();
    if zero.is_empty() {
        return match (neg, pos) {
            (_, 0) => Stability::Sink,
            (0, _) => Stability::Source,
            _ => Stability::Saddle,
        };
    }
    if pos > 0 && neg > 0 {
        return Stability::Saddle;
    }
    if zero.iter().all(|z| z.im.abs() > tol) && pos == 0 {
        return Stability::CenterLike;
    }
    Stability::Degenerate
}

pub fn eigenvalues_at(system: &LVSystem, point: &[f64]) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = system.jacobian(point).complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

fn make_equilibrium(system: &LVSystem, point: Vec<f64>, support: Vec<usize>) -> Equilibrium {
    let eigenvalues = eigenvalues_at(system, &point);
    let stability = stability_of(&eigenvalues);
    Equilibrium {
        point,
        support,
        eigenvalues,
        stability,
    }
}

/// Enumerates all nonnegative equilibria (`n ≤ 10`).
pub fn equilibria(system: &LVSystem) -> Result<EquilibriumCensus> {
    let n = system.n();
    if n > MAX_DIM {
        return Err(invalid("n", format!("support enumeration limited to n <= {MAX_DIM}")));
    }
    let mut census = EquilibriumCensus::default();
    census.isolated.push(make_equilibrium(system, vec![0.0; n], vec![]));

    // larger supports first so that sub-families can be absorbed
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));

    for mask in masks {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let m = support.len();
        let sub = DMatrix::from_fn(m, m, |i, j| system.a[(support[i], support[j])]);
        let rhs = DVector::from_element(m, -system.r);
        let svd = sub.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let cutoff = RANK_TOL * smax.max(1.0);
        let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
        let embed = |local: &DVector<f64>| {
            let mut y = vec![0.0; n];
            for (k, &i) in support.iter().enumerate() {
                y[i] = local[k];
            }
            y
        };

        if rank == m {
            let sol = svd.solve(&rhs, cutoff).expect("svd has u and v");
            if sol.iter().all(|v| *v > 0.0) {
                let y = embed(&sol);
                let duplicate = census.isolated.iter().any(|e| crate::lv::distance(&e.point, &y) < DEDUP_TOL);
                if !duplicate {
                    census.isolated.push(make_equilibrium(system, y, support.clone()));
                }
            }
            continue;
        }

        let sol = svd.solve(&rhs, cutoff).expect("svd has u and v");
        let residual = (&sub * &sol - &rhs).norm();
        if residual > 1e-8 * (1.0 + system.r) {
            continue;
        }
        let v_t = svd.v_t.as_ref().expect("requested");
        let directions: Vec<Vec<f64>> = (0..m)
            .filter(|&k| svd.singular_values[k] <= cutoff)
            .map(|k| embed(&v_t.row(k).transpose()))
            .collect();
        let particular = embed(&sol);
        let deficiency = m - rank;
        let segment = if deficiency == 1 {
            let d = &directions[0];
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for &i in &support {
                if d[i].abs() < 1e-14 {
                    if particular[i] < 0.0 {
                        lo = f64::INFINITY;
                    }
                    continue;
                }
                let bound = -particular[i] / d[i];
                if d[i] > 0.0 {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            }
            if !(lo < hi - 1e-12) {
                continue;
            }
            Some((lo, hi))
        } else {
            if particular.iter().any(|v| *v < 0.0) {
                continue;
            }
            None
        };
        let family = EquilibriumContinuum {
            support: support.clone(),
            particular,
            directions,
            rank_deficiency: deficiency,
            segment,
        };
        let absorbed = census.continua.iter().any(|c| {
            let probe_points = match family.segment {
                Some((lo, hi)) => vec![family.at(lo), family.at(hi), family.at(0.5 * (lo + hi))],
                None => vec![family.particular.clone()],
            };
            probe_points.iter().all(|p| c.contains(system, p))
        });
        if !absorbed {
            census.continua.push(family);
        }
    }
    // points found on smaller supports may lie on a reported family
    let continua = std::mem::take(&mut census.continua);
    census.isolated.retain(|e| !continua.iter().any(|c| c.contains(system, &e.point)));
    census.continua = continua;
    census
        .isolated
        .sort_by(|a, b| a.support.len().cmp(&b.support.len()).then(a.support.cmp(&b.support)));
    Ok(census)
}
