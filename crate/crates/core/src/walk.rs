//! Random-walk analogue of the wall with a shrinking hole.
//!
//! Off the origin the walk takes fair +-1 steps. From the origin it returns
//! to the side it came from with probability `1 - eps` and goes to the other
//! side with probability `eps`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{LE_CAM_MAX_TERMS, POISSON_LOG_SPACE_LAMBDA};
use crate::error::{Error, Result};
use crate::path::PathFunction;
use crate::rng::stream;
use crate::sim::{scaled_path, TrajectoryRecord};
use crate::wall::AlphaSchedule;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkRegime {
    /// `eps = alpha_k` at a visit to 0 at time `k`.
    #[default]
    Shrinking,
    /// `eps = alpha_n` for every visit of a horizon-`n` walk.
    DoubleArray,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub regime: WalkRegime,
    pub alpha: AlphaSchedule,
    pub n: usize,
}

impl WalkConfig {
    pub fn new(regime: WalkRegime, alpha: AlphaSchedule, n: usize) -> Result<Self> {
        let cfg = Self { regime, alpha, n };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Crossing probability at a visit to the origin at time `k`.
    pub fn epsilon(&self, k: usize) -> f64 {
        match self.regime {
            WalkRegime::Shrinking => self.alpha.at(k),
            WalkRegime::DoubleArray => self.alpha.at(self.n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("walk horizon must be positive".into()));
        }
        let bad = match self.regime {
            WalkRegime::DoubleArray => !(0.0..=1.0).contains(&self.epsilon(self.n)),
            // visits to 0 happen at even times only, but check every k
            WalkRegime::Shrinking => (1..=self.n).any(|k| !(0.0..=1.0).contains(&self.epsilon(k))),
        };
        if bad {
            return Err(Error::InvalidSchedule(format!(
                "crossing probability leaves [0, 1] for {:?}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Buffered fair coin flips, 64 per `u64` draw.
pub(crate) struct Coins {
    bits: u64,
    left: u32,
}

impl Coins {
    pub(crate) fn new() -> Self {
        Self { bits: 0, left: 0 }
    }

    #[inline]
    pub(crate) fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.left == 0 {
            self.bits = rng.random();
            self.left = 64;
        }
        let b = self.bits & 1 == 1;
        self.bits >>= 1;
        self.left -= 1;
        b
    }
}

/// One walk of `config.n` steps.
///
/// `position` holds the walk (starting at +-1), `l[k]` counts visits to 0
/// at times `1..=k`, and `crossing_steps` lists the visit times after which
/// the walk changed side.
pub fn run_walk<R: Rng + ?Sized>(rng: &mut R, config: &WalkConfig) -> Result<TrajectoryRecord> {
    config.validate()?;
    let n = config.n;
    let mut coins = Coins::new();
    let start: i64 = if coins.flip(rng) { 1 } else { -1 };
    let mut rec = TrajectoryRecord::start(n, start as f64, None);
    let (mut prev, mut cur) = (start, start);
    let mut visits = 0u32;
    for k in 0..n {
        // The rule at 0 needs S_{k-1}; S_0 = +-1 is never 0, so k = 0 steps fairly.
        let next = if cur != 0 {
            if coins.flip(rng) {
                cur + 1
            } else {
                cur - 1
            }
        } else {
            let eps = config.epsilon(k);
            let u: f64 = rng.random();
            if u < eps {
                rec.crossing_steps.push(k);
                -prev
            } else {
                rec.wall_hits += 1;
                prev
            }
        };
        prev = cur;
        cur = next;
        if cur == 0 {
            visits += 1;
        }
        rec.push(cur as f64, visits, config.epsilon(k + 1));
    }
    Ok(rec)
}

/// Runs `samples` walks (walk `i` on stream `i` of `seed`) and maps each
/// record through `f`.
pub fn run_walk_ensemble<T, F>(config: &WalkConfig, samples: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, TrajectoryRecord) -> T + Sync,
{
    config.validate()?;
    (0..samples)
        .into_par_iter()
        .map(|i| run_walk(&mut stream(seed, i as u64), config).map(|rec| f(i, rec)))
        .collect()
}

/// `W_n(k/n) = S_k / sqrt(n)`, shared with the billiard records.
pub fn walk_scaled_path(record: &TrajectoryRecord, n: usize) -> PathFunction {
    scaled_path(record, n)
}

/// Probability that the two-state sign chain started at `+` is at `+` after
/// flipping with probabilities `p[0], p[1], ...`: `(1 + prod(1 - 2 p_k)) / 2`.
pub fn chain_plus_probability(p: &[f64]) -> f64 {
    0.5 * (1.0 + p.iter().map(|pk| 1.0 - 2.0 * pk).product::<f64>())
}

/// Exact `sum_k |P(Sigma = k) - Poisson(lambda)(k)|` for a sum of independent
/// Bernoulli(`p_j`), with `lambda = sum p_j`, together with Le Cam's bound
/// `2 sum p_j^2`.
pub fn le_cam_bound(p: &[f64]) -> Result<(f64, f64)> {
    if p.len() > LE_CAM_MAX_TERMS {
        return Err(Error::SizeExceeded {
            got: p.len(),
            max: LE_CAM_MAX_TERMS,
        });
    }
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("probability {bad} outside [0, 1]")));
    }
    let pmf = poisson_binomial_pmf(p);
    let lambda: f64 = p.iter().sum();
    let bound = 2.0 * p.iter().map(|x| x * x).sum::<f64>();

    let mut tv = 0.0;
    for (k, &pb) in pmf.iter().enumerate() {
        tv += (pb - poisson_pmf(lambda, k)).abs();
    }
    // Poisson mass beyond the support of the Bernoulli sum.
    let mut k = pmf.len();
    loop {
        let term = poisson_pmf(lambda, k);
        tv += term;
        if k as f64 > lambda && term < 1e-20 {
            break;
        }
        k += 1;
    }
    Ok((tv, bound))
}

/// Distribution of a sum of independent Bernoulli variables, by convolution.
pub fn poisson_binomial_pmf(p: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; p.len() + 1];
    pmf[0] = 1.0;
    for (j, &pj) in p.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - pj) + pmf[k - 1] * pj;
        }
        pmf[0] *= 1.0 - pj;
    }
    pmf
}

pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    let log_p = -lambda + kf * lambda.ln() - statrs::function::gamma::ln_gamma(kf + 1.0);
    if lambda > POISSON_LOG_SPACE_LAMBDA || k > 170 {
        return log_p.exp();
    }
    // small k, moderate lambda: direct product is slightly more accurate
    let mut v = (-lambda).exp();
    for i in 1..=k {
        v *= lambda / i as f64;
    }
    v
}
