//! Discretized two-sided Brownian motion.
//!
//! A [`BrownianPath`] lives on a uniform grid `t_k = k·Δ` that always contains
//! `t = 0`. Grid positions are integers, so shifts compose exactly. The raw
//! samples are shared behind an `Arc`: shifting a path only moves the origin
//! and subtracts the value found there, which makes `θ_a ∘ θ_b = θ_{a+b}`
//! hold bit for bit.
//!
//! The forward half `[0, t_max]` and the backward half `[t_min, 0]` are drawn
//! from two independent ChaCha streams keyed by the seed. Refinement fills
//! midpoints with a Brownian bridge drawn from a third family of streams keyed
//! by `(seed, generation)` and consumed in interval order.

use std::io::{Read, Write};
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::seed::stream_rng;

const STREAM_FORWARD: u64 = 0;
const STREAM_BACKWARD: u64 = 1;
const STREAM_BRIDGE: u64 = 2;
const MAX_POINTS: u128 = 1 << 31;
const GRID_TOL: f64 = 1e-9;
const MAGIC: &[u8; 8] = b"SLVPATH1";

#[derive(Clone, Debug)]
pub struct BrownianPath {
    raw: Arc<[f64]>,
    /// Index into `raw` of the sample sitting at time zero.
    origin: usize,
    step: f64,
    seed: u64,
    generation: u32,
}

/// Converts `t` into an integer multiple of `step`, rejecting off-grid values.
pub fn grid_index(t: f64, step: f64) -> Result<i64> {
    let k = (t / step).round();
    if (k * step - t).abs() > GRID_TOL * t.abs().max(1.0) {
        return Err(Error::OffGrid { t, step });
    }
    Ok(k as i64)
}

impl BrownianPath {
    /// Samples a path on `[t_min, t_max]` with grid spacing `step`.
    pub fn sample(seed: u64, t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(invalid("step", format!("must be positive, got {step}")));
        }
        if t_min > 0.0 {
            return Err(invalid("t_min", format!("must be <= 0, got {t_min}")));
        }
        if t_max < 0.0 {
            return Err(invalid("t_max", format!("must be >= 0, got {t_max}")));
        }
        let back = grid_index(t_min, step)?.unsigned_abs() as u128;
        let fwd = grid_index(t_max, step)?.unsigned_abs() as u128;
        let total = back + fwd + 1;
        if total > MAX_POINTS {
            return Err(Error::GridOverflow(total));
        }
        let (back, fwd) = (back as usize, fwd as usize);
        let sd = step.sqrt();
        let mut raw = vec![0.0; back + fwd + 1];

        let mut rng = stream_rng(seed, STREAM_FORWARD);
        for k in 0..fwd {
            let z: f64 = StandardNormal.sample(&mut rng);
            raw[back + k + 1] = raw[back + k] + sd * z;
        }
        let mut rng = stream_rng(seed, STREAM_BACKWARD);
        for k in 0..back {
            let z: f64 = StandardNormal.sample(&mut rng);
            raw[back - k - 1] = raw[back - k] + sd * z;
        }
        Ok(Self {
            raw: raw.into(),
            origin: back,
            step,
            seed,
            generation: 0,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Grid index of the earliest sample (≤ 0).
    pub fn first_index(&self) -> i64 {
        -(self.origin as i64)
    }

    /// Grid index of the latest sample (≥ 0).
    pub fn last_index(&self) -> i64 {
        (self.raw.len() - 1 - self.origin) as i64
    }

    pub fn t_min(&self) -> f64 {
        self.first_index() as f64 * self.step
    }

    pub fn t_max(&self) -> f64 {
        self.last_index() as f64 * self.step
    }

    pub fn time(&self, index: i64) -> f64 {
        index as f64 * self.step
    }

    pub fn index_of(&self, t: f64) -> Result<i64> {
        let k = grid_index(t, self.step)?;
        if k < self.first_index() || k > self.last_index() {
            return Err(self.domain_error(t, t));
        }
        Ok(k)
    }

    fn domain_error(&self, lo: f64, hi: f64) -> Error {
        Error::OutOfDomain {
            lo,
            hi,
            t_min: self.t_min(),
            t_max: self.t_max(),
        }
    }

    /// `W(k·Δ)`, or `None` outside the sampled window.
    pub fn at_index(&self, index: i64) -> Option<f64> {
        let pos = index + self.origin as i64;
        if pos < 0 || pos as usize >= self.raw.len() {
            return None;
        }
        Some(self.raw[pos as usize] - self.raw[self.origin])
    }

    /// `W(t)` for a grid time `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        let k = self.index_of(t)?;
        Ok(self.at_index(k).expect("index checked"))
    }

    /// Values `W(t_k)` for grid indices `from..=to`.
    pub fn values_between(&self, from: i64, to: i64) -> Result<Vec<f64>> {
        if from > to || from < self.first_index() || to > self.last_index() {
            return Err(self.domain_error(self.time(from), self.time(to)));
        }
        let base = self.raw[self.origin];
        let lo = (from + self.origin as i64) as usize;
        let hi = (to + self.origin as i64) as usize;
        Ok(self.raw[lo..=hi].iter().map(|w| w - base).collect())
    }

    /// Values on `[0, t]`; `t` must be a nonnegative grid time.
    pub fn forward_values(&self, t: f64) -> Result<Vec<f64>> {
        if t < 0.0 {
            return Err(invalid("t", format!("must be >= 0, got {t}")));
        }
        let k = self.index_of(t)?;
        self.values_between(0, k)
    }

    /// All samples paired with their times.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let base = self.raw[self.origin];
        let first = self.first_index();
        self.raw
            .iter()
            .enumerate()
            .map(move |(i, w)| ((first + i as i64) as f64 * self.step, w - base))
    }

    /// Halves the step, filling midpoints with a Brownian bridge.
    pub fn refine(&self) -> Self {
        let n = self.raw.len();
        let mut out = Vec::with_capacity(2 * n - 1);
        let sd = (self.step / 4.0).sqrt();
        let mut rng = stream_rng(self.seed, STREAM_BRIDGE + self.generation as u64);
        for i in 0..n - 1 {
            let (a, b) = (self.raw[i], self.raw[i + 1]);
            let z: f64 = StandardNormal.sample(&mut rng);
            out.push(a);
            out.push(0.5 * (a + b) + sd * z);
        }
        out.push(self.raw[n - 1]);
        Self {
            raw: out.into(),
            origin: 2 * self.origin,
            step: self.step / 2.0,
            seed: self.seed,
            generation: self.generation + 1,
        }
    }

    /// The shifted path `s ↦ W(s + t) − W(t)`.
    pub fn shift(&self, t: f64) -> Result<Self> {
        let k = grid_index(t, self.step)?;
        if k < self.first_index() || k > self.last_index() {
            return Err(self.domain_error(self.t_min() - t, self.t_max() - t));
        }
        Ok(Self {
            raw: Arc::clone(&self.raw),
            origin: (self.origin as i64 + k) as usize,
            step: self.step,
            seed: self.seed,
            generation: self.generation,
        })
    }

    /// Checks that `[lo, hi]` is covered by the sampled window.
    pub fn require_window(&self, lo: f64, hi: f64) -> Result<()> {
        let tol = GRID_TOL * self.step;
        if lo < self.t_min() - tol || hi > self.t_max() + tol {
            return Err(self.domain_error(lo, hi));
        }
        Ok(())
    }

    /// Writes the binary dump used for failure reproduction.
    ///
    /// Layout (little endian): magic, seed u64, t_min f64, t_max f64,
    /// step f64, generation u32, origin u64, count u64, then `count` f64
    /// values `W(t_k)` starting at `t_min`.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.t_min().to_le_bytes())?;
        w.write_all(&self.t_max().to_le_bytes())?;
        w.write_all(&self.step.to_le_bytes())?;
        w.write_all(&self.generation.to_le_bytes())?;
        w.write_all(&(self.origin as u64).to_le_bytes())?;
        w.write_all(&(self.raw.len() as u64).to_le_bytes())?;
        let base = self.raw[self.origin];
        for v in self.raw.iter() {
            w.write_all(&(v - base).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn restore<R: Read>(mut r: R) -> Result<Self> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)?;
            Ok(buf)
        }
        if &take::<8, _>(&mut r)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let seed = u64::from_le_bytes(take(&mut r)?);
        let t_min = f64::from_le_bytes(take(&mut r)?);
        let t_max = f64::from_le_bytes(take(&mut r)?);
        let step = f64::from_le_bytes(take(&mut r)?);
        let generation = u32::from_le_bytes(take(&mut r)?);
        let origin = u64::from_le_bytes(take(&mut r)?) as usize;
        let count = u64::from_le_bytes(take(&mut r)?);
        if count as u128 > MAX_POINTS || origin as u64 >= count || !(step > 0.0) {
            return Err(Error::Format("inconsistent header".into()));
        }
        let mut raw = Vec::with_capacity(count as usize);
        for _ in 0..count {
            raw.push(f64::from_le_bytes(take(&mut r)?));
        }
        let path = Self {
            raw: raw.into(),
            origin,
            step,
            seed,
            generation,
        };
        if (path.t_min() - t_min).abs() > GRID_TOL * step || (path.t_max() - t_max).abs() > GRID_TOL * step {
            return Err(Error::Format("header window disagrees with payload".into()));
        }
        Ok(path)
    }
}

/// Shorthand for [`BrownianPath::sample`].
pub fn sample_path(seed: u64, t_min: f64, t_max: f64, step: f64) -> Result<BrownianPath> {
    BrownianPath::sample(seed, t_min, t_max, step)
}

pub fn refine(path: &BrownianPath) -> BrownianPath {
    path.refine()
}

pub fn shift(path: &BrownianPath, t: f64) -> Result<BrownianPath> {
    path.shift(t)
}
