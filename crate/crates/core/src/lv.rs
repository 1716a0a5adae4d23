//! Deterministic Lotka–Volterra flow `dy_i/dt = y_i(r + Σ_j a_ij y_j)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::logistic::{Calculus, LogisticParams};

const NEG_CLAMP: f64 = 1e-14;
const BLOWUP: f64 = 1e12;

/// An LV system with identical growth rate `r` for every species.
///
/// The interaction matrix is stored in the signed convention
/// `F_i(y) = y_i(r + Σ a_ij y_j)`; competitive systems have `a_ij < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LVSystem {
    pub r: f64,
    pub a: DMatrix<f64>,
    pub sigma: f64,
    pub calculus: Calculus,
}

impl LVSystem {
    /// Builds a system from the signed interaction matrix (row-major rows).
    pub fn new(r: f64, rows: &[Vec<f64>], sigma: f64, calculus: Calculus) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("a", "interaction matrix is empty"));
        }
        if rows.iter().any(|row| row.len() != n) {
            return Err(invalid("a", "interaction matrix must be square"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("a", "entries must be finite"));
        }
        LogisticParams::new(r, sigma, calculus)?;
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(Self { r, a, sigma, calculus })
    }

    /// Builds a system from competitive coefficients `c_ij` of
    /// `dy_i/dt = y_i(r − Σ c_ij y_j)`.
    pub fn competitive(r: f64, c: &[Vec<f64>], sigma: f64, calculus: Calculus) -> Result<Self> {
        let neg: Vec<Vec<f64>> = c.iter().map(|row| row.iter().map(|v| -v).collect()).collect();
        Self::new(r, &neg, sigma, calculus)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// All competitive coefficients `−a_ij` are strictly positive.
    pub fn is_competitive(&self) -> bool {
        self.a.iter().all(|&v| v < 0.0)
    }

    /// Competitive coefficient `c_ij = −a_ij`.
    pub fn competition(&self, i: usize, j: usize) -> f64 {
        -self.a[(i, j)]
    }

    pub fn with_noise(&self, sigma: f64, calculus: Calculus) -> Self {
        Self {
            sigma,
            calculus,
            ..self.clone()
        }
    }

    pub fn logistic(&self) -> LogisticParams {
        LogisticParams {
            r: self.r,
            sigma: self.sigma,
            calculus: self.calculus,
        }
    }

    /// Per-capita rate `r + (A y)_i`.
    #[inline]
    pub fn per_capita(&self, y: &[f64], i: usize) -> f64 {
        let mut acc = self.r;
        for (j, yj) in y.iter().enumerate() {
            acc += self.a[(i, j)] * yj;
        }
        acc
    }

    /// Writes `F(y)` into `out` without validation.
    #[inline]
    pub fn field_into(&self, y: &[f64], out: &mut [f64]) {
        for i in 0..y.len() {
            out[i] = y[i] * self.per_capita(y, i);
        }
    }

    pub fn vector_field(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_state(y)?;
        let mut out = vec![0.0; y.len()];
        self.field_into(y, &mut out);
        Ok(out)
    }

    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { self.per_capita(y, i) } else { 0.0 };
            diag + y[i] * self.a[(i, j)]
        })
    }

    pub(crate) fn check_state(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n() {
            return Err(invalid("y", format!("expected {} components, got {}", self.n(), y.len())));
        }
        if y.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("y", "state must be finite and componentwise nonnegative"));
        }
        Ok(())
    }
}

/// Scratch space for repeated RK4 steps.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `y` in place by one classical RK4 step of size `h`.
    pub fn step(&mut self, system: &LVSystem, y: &mut [f64], h: f64) {
        let n = y.len();
        system.field_into(y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        system.field_into(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        system.field_into(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        system.field_into(&self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
            if y[i] < 0.0 && y[i] > -NEG_CLAMP {
                y[i] = 0.0;
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub system: String,
    pub seed: Option<u64>,
    pub step: f64,
}

/// Time-stamped nonnegative states, stored row-major.
#[derive(Clone, Debug)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    data: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            times: Vec::new(),
            data: Vec::new(),
            meta: TrajectoryMeta::default(),
        }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            times: Vec::with_capacity(cap),
            data: Vec::with_capacity(cap * dim),
            meta: TrajectoryMeta::default(),
        }
    }

    pub fn push(&mut self, t: f64, y: &[f64]) {
        debug_assert_eq!(y.len(), self.dim);
        debug_assert!(self.times.last().map_or(true, |&last| t > last));
        self.times.push(t);
        self.data.extend_from_slice(y);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn last(&self) -> Option<&[f64]> {
        (!self.is_empty()).then(|| self.state(self.len() - 1))
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Linear interpolation of the state at time `t` within the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return (t == self.times.first().copied()?).then(|| self.state(0).to_vec());
        }
        if k == self.len() {
            return (t == *self.times.last()?).then(|| self.state(k - 1).to_vec());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(
            self.state(k - 1)
                .iter()
                .zip(self.state(k))
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        )
    }

    /// Keeps every `stride`-th sample (and the last one).
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let mut out = Self::new(self.dim);
        out.meta = self.meta.clone();
        for k in (0..self.len()).step_by(stride) {
            out.push(self.times[k], self.state(k));
        }
        if (self.len() - 1) % stride != 0 {
            out.push(self.times[self.len() - 1], self.state(self.len() - 1));
        }
        out
    }
}

/// Fixed-step classical RK4 trajectory of the deterministic flow Ψ.
pub fn integrate_ode(system: &LVSystem, y0: &[f64], horizon: f64, step: f64) -> Result<Trajectory> {
    system.check_state(y0)?;
    if !(step > 0.0) {
        return Err(invalid("step", format!("must be positive, got {step}")));
    }
    if !(horizon >= 0.0) {
        return Err(invalid("T", format!("must be nonnegative, got {horizon}")));
    }
    let steps = (horizon / step).round().max(0.0) as usize;
    let h = if steps > 0 { horizon / steps as f64 } else { step };
    let mut traj = Trajectory::with_capacity(system.n(), steps + 1);
    traj.meta.step = h;
    let mut y = y0.to_vec();
    let mut rk = Rk4::new(system.n());
    traj.push(0.0, &y);
    for k in 1..=steps {
        rk.step(system, &mut y, h);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= BLOWUP) {
            return Err(Error::Diverged {
                time: k as f64 * h,
                norm,
            });
        }
        traj.push(k as f64 * h, &y);
    }
    Ok(traj)
}

/// Step-doubling error estimate: max deviation at the end point between
/// steps `h` and `h/2`, divided by `2⁴ − 1`.
pub fn step_doubling_error(system: &LVSystem, y0: &[f64], horizon: f64, step: f64) -> Result<f64> {
    let coarse = integrate_ode(system, y0, horizon, step)?;
    let fine = integrate_ode(system, y0, horizon, step / 2.0)?;
    let (a, b) = (coarse.last().expect("nonempty"), fine.last().expect("nonempty"));
    let err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(err / 15.0)
}

/// Radial projection onto the standard simplex.
pub fn simplex_project(y: &[f64]) -> Result<Vec<f64>> {
    if y.iter().any(|v| !(*v >= 0.0)) {
        return Err(invalid("y", "must be componentwise nonnegative"));
    }
    let s: f64 = y.iter().sum();
    if s == 0.0 {
        return Err(Error::Degenerate("cannot project the origin".into()));
    }
    Ok(y.iter().map(|v| v / s).collect())
}

/// Projection that tolerates rounding-level negatives; `None` at the origin.
pub(crate) fn project_lenient(y: &[f64]) -> Option<Vec<f64>> {
    let s: f64 = y.iter().map(|v| v.max(0.0)).sum();
    (s > 0.0).then(|| y.iter().map(|v| v.max(0.0) / s).collect())
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
