//! Estimators and Kolmogorov-Smirnov tests over ensembles.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constants::{EXPECTED_LOCAL_TIME_AT_ONE, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::limit::standard_normal_pdf;
use crate::path::PathFunction;

/// Scalar statistics from one experiment, with where they came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub regime: String,
    pub n: usize,
    pub schedule: String,
    pub seed: u64,
}

impl Ensemble {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewSamples {
                got: values.len(),
                needed: 2,
            });
        }
        Ok(Self { values, provenance })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Outcome of one check. `pass` holds exactly when `statistic <= threshold`;
/// `value` carries the raw estimate the statistic was derived from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub runtime_secs: f64,
    pub value: f64,
    pub detail: String,
}

impl TestReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            p_value: None,
            pass: statistic <= threshold,
            runtime_secs: 0.0,
            value: statistic,
            detail: String::new(),
        }
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = value;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn timed(mut self, since: Instant) -> Self {
        self.runtime_secs = since.elapsed().as_secs_f64();
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.pass = self.statistic <= threshold;
        self
    }
}

/// A distribution function with a left limit, so that atoms are handled.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    /// `P(X < x)`; equal to `cdf` for continuous laws.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Continuous part given by `cdf`, atom of size `mass` at `at`.
pub struct WithAtom<F> {
    pub cdf: F,
    pub at: f64,
    pub mass: f64,
}

impl<F: Fn(f64) -> f64> Cdf for WithAtom<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x == self.at {
            (self.cdf)(x) - self.mass
        } else {
            (self.cdf)(x)
        }
    }
}

/// Empirical distribution function.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(data: &[f64]) -> Self {
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

impl Cdf for Ecdf {
    fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }
}

pub fn ecdf(data: &[f64]) -> Ecdf {
    Ecdf::new(data)
}

fn require(got: usize) -> Result<()> {
    if got < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got,
            needed: MIN_SAMPLES,
        });
    }
    Ok(())
}

/// `sup_x |F_hat(x) - F(x)|` over data sorted ascending.
pub fn ks_distance_sorted<C: Cdf + ?Sized>(sorted: &[f64], cdf: &C) -> f64 {
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        // F_hat is i/m just below x and j/m at x
        d = d.max((cdf.cdf_left(x) - i as f64 / m).abs());
        d = d.max((j as f64 / m - cdf.cdf(x)).abs());
        i = j;
    }
    d
}

/// One-sample KS test. Sample size must be at least `MIN_SAMPLES`.
pub fn ks_one_sample<C: Cdf + ?Sized>(
    name: &str,
    data: &[f64],
    cdf: &C,
    threshold: f64,
) -> Result<TestReport> {
    let start = Instant::now();
    require(data.len())?;
    if data.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    let e = Ecdf::new(data);
    let d = ks_distance_sorted(e.sorted(), cdf);
    let ne = data.len() as f64;
    Ok(TestReport::new(name, d, threshold)
        .with_p_value(ks_p_value(d, ne))
        .with_detail(format!("n={}", data.len()))
        .timed(start))
}

/// Two-sample KS distance.
pub fn ks_two_sample_distance(a: &[f64], b: &[f64]) -> f64 {
    let ea = Ecdf::new(a);
    let eb = Ecdf::new(b);
    let (xa, xb) = (ea.sorted(), eb.sorted());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS test; the p-value uses the effective size `n m / (n + m)`.
pub fn ks_two_sample(name: &str, a: &[f64], b: &[f64], threshold: f64) -> Result<TestReport> {
    let start = Instant::now();
    require(a.len().min(b.len()))?;
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    let d = ks_two_sample_distance(a, b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ne = na * nb / (na + nb);
    Ok(TestReport::new(name, d, threshold)
        .with_p_value(ks_p_value(d, ne))
        .with_detail(format!("n={} m={}", a.len(), b.len()))
        .timed(start))
}

/// Asymptotic p-value with Stephens' finite-size adjustment.
pub fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let s = effective_n.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form converges fast for small x
        let pi2 = std::f64::consts::PI.powi(2);
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (-j * j * pi2 / (8.0 * x * x)).exp();
        }
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Sample standard deviation of `S_n / sqrt(n)`.
pub fn estimate_sigma(s_n: &[f64], n: usize) -> Result<f64> {
    if s_n.len() < 2 {
        return Err(Error::TooFewSamples {
            got: s_n.len(),
            needed: 2,
        });
    }
    let scale = (n as f64).sqrt();
    let scaled: Vec<f64> = s_n.iter().map(|s| s / scale).collect();
    let (_, var) = mean_var(&scaled);
    Ok(var.sqrt())
}

/// `mean(L_n / sqrt(n))` divided by the mean local time at 1 of Brownian
/// motion with parameter `sigma`.
pub fn estimate_c0(l_n: &[f64], n: usize, sigma: f64) -> Result<f64> {
    if l_n.len() < 2 {
        return Err(Error::TooFewSamples {
            got: l_n.len(),
            needed: 2,
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let scale = (n as f64).sqrt();
    let mean = l_n.iter().map(|l| l / scale).sum::<f64>() / l_n.len() as f64;
    Ok(mean / (EXPECTED_LOCAL_TIME_AT_ONE / sigma))
}

/// Mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mean = x.iter().sum::<f64>() / m;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

/// Sign of `path(s) * path(t)`.
pub fn sign_change_stat(path: &PathFunction, s: f64, t: f64) -> i8 {
    debug_assert!(0.0 < s && s < t && t <= 1.0);
    let v = path.eval(s) * path.eval(t);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of the excursion in progress at `t`: the sign of the last nonzero
/// grid value at or before `t`, else of the first one after it.
pub fn excursion_sign(path: &PathFunction, t: f64) -> i8 {
    let values = path.values();
    let k = path.grid().partition_point(|&g| g <= t);
    let before = values[..k].iter().rev().find(|v| **v != 0.0);
    let found = before.or_else(|| values[k..].iter().find(|v| **v != 0.0));
    match found {
        Some(v) if *v > 0.0 => 1,
        Some(_) => -1,
        None => 0,
    }
}

/// Number of sign changes between consecutive nonzero grid values in `[t0, t1]`.
pub fn count_sign_changes(path: &PathFunction, t0: f64, t1: f64) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for (t, v) in path.grid().iter().zip(path.values()) {
        if *t < t0 || *t > t1 || *v == 0.0 {
            continue;
        }
        if last != 0.0 && last.signum() != v.signum() {
            changes += 1;
        }
        last = *v;
    }
    changes
}

/// Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (mx, vx) = mean_var(x);
    let (my, vy) = mean_var(y);
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() as f64 - 1.0);
    cov / (vx * vy).sqrt()
}

/// Local limit check at `b`: the density of `S_n / sqrt(n)` near `b`, from
/// the fraction of samples in `[floor(b sqrt n) - (w - 1), floor(b sqrt n) + 1)`
/// with `w = window` lattice units, against `phi(b / sigma) / sigma`.
///
/// For the +-1 walk use `window = 2`: the window then holds exactly one
/// site of the walk's parity class. Passes within 4 standard errors.
pub fn llt_check(name: &str, s_n: &[f64], n: usize, b: f64, sigma: f64, window: f64) -> Result<TestReport> {
    let start = Instant::now();
    require(s_n.len())?;
    let rn = (n as f64).sqrt();
    let hi = (b * rn).floor() + 1.0;
    let lo = hi - window;
    let hits = s_n.iter().filter(|&&s| s >= lo && s < hi).count() as f64;
    let m = s_n.len() as f64;
    let estimate = hits / m * rn / window;
    let target = standard_normal_pdf(b / sigma) / sigma;
    let p = (target * window / rn).min(1.0);
    let se = (p * (1.0 - p) / m).sqrt() * rn / window;
    let z = if se > 0.0 {
        (estimate - target).abs() / se
    } else {
        0.0
    };
    Ok(TestReport::new(name, z, 4.0)
        .with_value(estimate)
        .with_detail(format!("density {estimate:.4} vs {target:.4}, se {se:.4}"))
        .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::standard_normal_cdf;
    use crate::path::Interpolation;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_quantile(p: f64) -> f64 {
        // bisection on the cdf
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if standard_normal_cdf(mid) < p {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn exact_quantiles_give_half_step() {
        let m = 200;
        let data: Vec<f64> = (1..=m)
            .map(|i| normal_quantile((i as f64 - 0.5) / m as f64))
            .collect();
        let r = ks_one_sample("q", &data, &standard_normal_cdf, 1.0).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.5 / m as f64, epsilon = 1e-9);
    }

    #[test]
    fn single_point_at_median() {
        let data = [0.0];
        assert_eq!(ks_distance_sorted(&data, &standard_normal_cdf), 0.5);
        assert!(matches!(
            ks_one_sample("x", &data, &standard_normal_cdf, 1.0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn atoms_are_not_penalised() {
        // half the mass at 0, uniform on (0, 1] otherwise
        let law = WithAtom {
            cdf: |x: f64| if x < 0.0 { 0.0 } else { (0.5 + 0.5 * x).min(1.0) },
            at: 0.0,
            mass: 0.5,
        };
        let mut data = vec![0.0; 500];
        data.extend((0..500).map(|i| (i as f64 + 0.5) / 500.0));
        let d = ks_distance_sorted(Ecdf::new(&data).sorted(), &law);
        assert!(d <= 1.0 / 1000.0 + 1e-12, "{d}");
    }

    #[test]
    fn normal_draws_pass_at_one_percent() {
        let mut passes = 0;
        for rep in 0..100 {
            let mut rng = stream(11, rep);
            let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = ks_one_sample("n", &x, &standard_normal_cdf, 1.63 / 100.0).unwrap();
            passes += usize::from(r.pass);
        }
        assert!(passes >= 97, "{passes}");
    }

    #[test]
    fn kolmogorov_series() {
        // both branches agree where they meet and hit the tabulated 1% point
        assert_abs_diff_eq!(kolmogorov_sf(1.0 - 1e-12), kolmogorov_sf(1.0), epsilon = 1e-9);
        assert_abs_diff_eq!(kolmogorov_sf(1.6276), 0.01, epsilon = 1e-4);
        assert_abs_diff_eq!(kolmogorov_sf(1.3581), 0.05, epsilon = 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn two_sample_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(ks_two_sample_distance(&a, &a), 0.0);
        let b: Vec<f64> = (200..300).map(f64::from).collect();
        assert_eq!(ks_two_sample_distance(&a, &b), 1.0);
        // ties across samples
        let c = vec![1.0; 60];
        let d: Vec<f64> = [1.0; 30].into_iter().chain([2.0; 30]).collect();
        assert_eq!(ks_two_sample_distance(&c, &d), 0.5);
    }

    #[test]
    fn sigma_and_c0() {
        assert_eq!(estimate_sigma(&[0.0; 10], 100).unwrap(), 0.0);
        assert_eq!(estimate_c0(&[0.0; 10], 100, 1.0).unwrap(), 0.0);
        assert!(estimate_sigma(&[1.0], 100).is_err());
        let mut rng = stream(12, 0);
        let sigma = 2.5;
        let n = 400;
        let x: Vec<f64> = (0..20_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sigma * 20.0 * z
            })
            .collect();
        let se = sigma / (2.0 * 20_000f64).sqrt();
        assert!((estimate_sigma(&x, n).unwrap() - sigma).abs() < 3.0 * se);
    }

    #[test]
    fn sign_changes() {
        let p = PathFunction::uniform(vec![0.0, 1.0, 0.0, -1.0, 0.0, -2.0, 3.0], Interpolation::Linear);
        assert_eq!(count_sign_changes(&p, 0.0, 1.0), 2);
        assert_eq!(count_sign_changes(&p, 0.4, 0.8), 0);
        assert_eq!(sign_change_stat(&p, 1.0 / 6.0, 0.5), -1);
        assert_eq!(sign_change_stat(&p, 1.0 / 3.0, 0.5), 0);
        assert_eq!(excursion_sign(&p, 1.0 / 3.0), 1);
        assert_eq!(excursion_sign(&p, 0.0), 1);
        assert_eq!(excursion_sign(&p, 0.7), -1);
        let rbm = PathFunction::uniform(vec![0.0, 0.3, 0.0, 0.2, 0.7], Interpolation::Linear);
        assert_eq!(sign_change_stat(&rbm, 0.25, 1.0), 1);
    }

    #[test]
    fn llt_far_tail() {
        let s = vec![1.0; 100];
        let r = llt_check("tail", &s, 10_000, 6.0, 1.0, 2.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.pass);
    }
}
