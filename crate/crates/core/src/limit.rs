//! Samplers for Brownian motion with its local time at 0 and for the
//! quasi-reflected Brownian motions built from them, plus closed-form
//! distributions used as oracles.
//!
//! The backbone is a simple +-1 walk of `N` steps: position `sigma * w_k / sqrt(N)`
//! and local time `(#zero visits up to k) / (r * sigma * sqrt(N))`, so path and
//! local time are exact functions of the same discrete object.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::constants::LATTICE_LOCAL_TIME_NORMALIZER;
use crate::error::{Error, Result};
use crate::path::{Interpolation, PathFunction};
use crate::walk::Coins;

pub const MIN_GRID: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPathWithLocalTime {
    pub path: PathFunction,
    pub local_time: PathFunction,
    pub sigma: f64,
    /// Grid indices `k >= 1` where the backbone sits at 0.
    pub zero_steps: Vec<usize>,
    pub n_grid: usize,
}

impl BrownianPathWithLocalTime {
    /// Local-time increment carried by one zero visit.
    pub fn local_time_quantum(&self) -> f64 {
        1.0 / (LATTICE_LOCAL_TIME_NORMALIZER * self.sigma * (self.n_grid as f64).sqrt())
    }
}

/// Brownian motion with parameter `sigma` on `[0, 1]` from 0, with its local time.
pub fn sample_bm_with_local_time<R: Rng + ?Sized>(
    rng: &mut R,
    n_grid: usize,
    sigma: f64,
) -> Result<BrownianPathWithLocalTime> {
    sample_bm_with_local_time_from(rng, n_grid, sigma, 0)
}

/// As [`sample_bm_with_local_time`], started from `start` lattice steps,
/// i.e. from `sigma * start / sqrt(N)`.
pub fn sample_bm_with_local_time_from<R: Rng + ?Sized>(
    rng: &mut R,
    n_grid: usize,
    sigma: f64,
    start: i64,
) -> Result<BrownianPathWithLocalTime> {
    if n_grid < MIN_GRID {
        return Err(Error::Domain(format!("grid size {n_grid} below {MIN_GRID}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let scale = sigma / (n_grid as f64).sqrt();
    let quantum = 1.0 / (LATTICE_LOCAL_TIME_NORMALIZER * sigma * (n_grid as f64).sqrt());
    let mut coins = Coins::new();
    let mut w = start;
    let mut path = Vec::with_capacity(n_grid + 1);
    let mut lt = Vec::with_capacity(n_grid + 1);
    let mut zero_steps = Vec::new();
    path.push(w as f64 * scale);
    lt.push(0.0);
    for k in 1..=n_grid {
        w += if coins.flip(rng) { 1 } else { -1 };
        if w == 0 {
            zero_steps.push(k);
        }
        path.push(w as f64 * scale);
        lt.push(zero_steps.len() as f64 * quantum);
    }
    Ok(BrownianPathWithLocalTime {
        path: PathFunction::uniform(path, Interpolation::Linear),
        local_time: PathFunction::uniform(lt, Interpolation::Step),
        sigma,
        zero_steps,
        n_grid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    /// `c dL` (qRBM).
    LocalTime,
    /// `c t^(-1/2) dL` (QRBM).
    LocalTimeOverSqrtT,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointProcess {
    /// Ascending; repeated times stand for several points at one zero visit.
    pub points: Vec<f64>,
    pub intensity: Intensity,
}

/// Poisson count by inversion; always consumes exactly one uniform for
/// small means so that runs differing only in `c` or `t0` stay aligned.
fn poisson_count<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u32 {
    if lambda >= 30.0 {
        return Poisson::new(lambda).map(|d| d.sample(rng) as u32).unwrap_or(0);
    }
    let u: f64 = rng.random();
    let mut k = 0u32;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// Poisson points driven by the local time of `bmlt`: at each zero visit at
/// time `t_k` the number of points is Poisson(`c * dL`) (or `c * dL / sqrt(t_k)`),
/// all placed at `t_k`. Points at times `<= t0` are dropped.
pub fn sample_point_process<R: Rng + ?Sized>(
    rng: &mut R,
    bmlt: &BrownianPathWithLocalTime,
    c: f64,
    intensity: Intensity,
    t0: f64,
) -> Result<PointProcess> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("intensity constant must be >= 0, got {c}")));
    }
    if !(0.0..1.0).contains(&t0) {
        return Err(Error::Domain(format!("truncation time {t0} outside [0, 1)")));
    }
    if intensity == Intensity::LocalTimeOverSqrtT && t0 == 0.0 {
        return Err(Error::TruncationRequired);
    }
    let mut points = Vec::new();
    if c == 0.0 {
        return Ok(PointProcess { points, intensity });
    }
    let dl = bmlt.local_time_quantum();
    let n = bmlt.n_grid as f64;
    for &k in &bmlt.zero_steps {
        let t = k as f64 / n;
        let lambda = match intensity {
            Intensity::LocalTime => c * dl,
            Intensity::LocalTimeOverSqrtT => c * dl / t.sqrt(),
        };
        let count = poisson_count(rng, lambda);
        if t > t0 {
            points.extend(std::iter::repeat_n(t, count as usize));
        }
    }
    Ok(PointProcess { points, intensity })
}

/// Quasi-reflected path: `|B_t|` with sign `(-1)^eta` on `(P_1, 1]`, flipped
/// at each point going backwards from `t = 1`.
pub fn assemble_qrbm(bmlt: &BrownianPathWithLocalTime, pp: &PointProcess, eta: bool) -> PathFunction {
    let grid = bmlt.path.grid();
    let abs: Vec<f64> = bmlt.path.values().iter().map(|v| v.abs()).collect();
    let base = if eta { -1.0 } else { 1.0 };
    let mut values = vec![0.0; abs.len()];
    // points >= t seen so far while walking t downwards
    let mut seen = 0usize;
    let mut next = pp.points.len();
    for k in (0..abs.len()).rev() {
        let t = grid[k];
        while next > 0 && pp.points[next - 1] >= t {
            next -= 1;
            seen += 1;
        }
        let sign = if seen.is_multiple_of(2) { base } else { -base };
        values[k] = sign * abs[k];
    }
    values[0] = 0.0_f64.copysign(values[0]);
    PathFunction::new(grid.to_vec(), values, Interpolation::Linear)
}

/// A qRBM sample together with the Brownian motion it was built from.
#[derive(Clone, Debug)]
pub struct QuasiReflectedSample {
    pub path: PathFunction,
    pub backbone: BrownianPathWithLocalTime,
    pub points: PointProcess,
    pub eta: bool,
}

/// qRBM(c, sigma) on a grid of `n_grid` steps.
pub fn sample_qrbm<R: Rng + ?Sized>(rng: &mut R, n_grid: usize, c: f64, sigma: f64) -> Result<PathFunction> {
    sample_quasi_reflected(rng, n_grid, c, sigma, Intensity::LocalTime, 0.0).map(|s| s.path)
}

/// QRBM(c, sigma), with Poisson points kept only on `(t0, 1]`.
pub fn sample_big_qrbm<R: Rng + ?Sized>(
    rng: &mut R,
    n_grid: usize,
    c: f64,
    sigma: f64,
    t0: f64,
) -> Result<PathFunction> {
    sample_quasi_reflected(rng, n_grid, c, sigma, Intensity::LocalTimeOverSqrtT, t0).map(|s| s.path)
}

/// Default QRBM truncation time `N^(-1/2)`.
pub fn default_truncation(n_grid: usize) -> f64 {
    1.0 / (n_grid as f64).sqrt()
}

/// Full sampler output. The draw order is backbone, `eta`, then one
/// Poisson count per zero visit, so runs with the same stream share the
/// backbone and `eta`.
pub fn sample_quasi_reflected<R: Rng + ?Sized>(
    rng: &mut R,
    n_grid: usize,
    c: f64,
    sigma: f64,
    intensity: Intensity,
    t0: f64,
) -> Result<QuasiReflectedSample> {
    let backbone = sample_bm_with_local_time(rng, n_grid, sigma)?;
    let eta = rng.random::<bool>();
    let points = sample_point_process(rng, &backbone, c, intensity, t0)?;
    let path = assemble_qrbm(&backbone, &points, eta);
    Ok(QuasiReflectedSample {
        path,
        backbone,
        points,
        eta,
    })
}

/// `P(L > y)` for the local time at 0 of a Brownian bridge with parameter
/// `sigma` from `a` at `t0` to `b` at `t1`.
pub fn bridge_local_time_tail(a: f64, b: f64, t0: f64, t1: f64, sigma: f64, y: f64) -> Result<f64> {
    if !(t1 > t0) {
        return Err(Error::Domain(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("need y >= 0, got {y}")));
    }
    let s2 = sigma * sigma;
    let reach = a.abs() + b.abs() + s2 * y;
    let exponent = -(reach * reach - (b - a) * (b - a)) / (2.0 * s2 * (t1 - t0));
    Ok(exponent.exp().clamp(0.0, 1.0))
}

/// `P(B_t <= x)` for Brownian motion with parameter `sigma`.
pub fn gaussian_marginal_cdf(t: f64, sigma: f64, x: f64) -> f64 {
    standard_normal_cdf(x / (sigma * t.sqrt()))
}

pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn standard_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
