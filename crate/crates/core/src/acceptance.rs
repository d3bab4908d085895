//! The acceptance suite: fixed-seed statistical checks of the scaling
//! limits for the walk, the limit samplers and the billiard.
//!
//! Every check returns a [`TestReport`]; thresholds are fixed constants.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::LATTICE_LOCAL_TIME_NORMALIZER;
use crate::error::{Error, Result};
use crate::limit::{
    bridge_local_time_tail, default_truncation, gaussian_marginal_cdf, sample_quasi_reflected, Intensity,
};
use crate::path::PathFunction;
use crate::rng::{derive_seed, stream};
use crate::sim::{run_trajectory, scaled_path, LorentzConfig};
use crate::stats::{
    correlation, count_sign_changes, estimate_c0, estimate_sigma, excursion_sign, ks_one_sample,
    ks_two_sample, ks_two_sample_distance, llt_check, TestReport, WithAtom,
};
use crate::walk::{chain_plus_probability, le_cam_bound, run_walk_ensemble, WalkConfig, WalkRegime};
use crate::wall::{AlphaSchedule, CrossingMode, HoleSchedule, Regime};

/// Sizes and seed of the suite. The defaults are the published settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub exact_inputs: usize,
    pub walk_n: usize,
    pub walk_samples: usize,
    pub grid_n: usize,
    pub observe_t0: f64,
    pub bridge_samples: usize,
    pub billiard_n: usize,
    pub billiard_samples: usize,
    pub trapdoor_samples: usize,
    pub trapdoor_c: f64,
    pub oracle_samples: usize,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            exact_inputs: 10_000,
            walk_n: 10_000,
            walk_samples: 10_000,
            grid_n: 10_000,
            observe_t0: 0.05,
            bridge_samples: 5_000,
            billiard_n: 10_000,
            billiard_samples: 1_000,
            trapdoor_samples: 4_000,
            trapdoor_c: 0.15,
            oracle_samples: 100_000,
        }
    }
}

impl AcceptanceConfig {
    /// Small sizes for smoke runs; thresholds are not meaningful at this scale.
    pub fn smoke() -> Self {
        Self {
            exact_inputs: 200,
            walk_n: 1_000,
            walk_samples: 200,
            grid_n: 1_000,
            bridge_samples: 200,
            billiard_n: 1_000,
            billiard_samples: 60,
            trapdoor_samples: 60,
            oracle_samples: 1_000,
            ..Self::default()
        }
    }

    fn seed_for(&self, label: &str) -> u64 {
        derive_seed(self.seed, label)
    }
}

/// The three scalar marginals compared between ensembles: `|W(1)|`, the number
/// of sign changes on `[t0, 1]` and `sign W(t0) * sign W(1)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Marginals {
    pub abs_end: Vec<f64>,
    pub changes: Vec<f64>,
    pub sign_product: Vec<f64>,
}

impl Marginals {
    pub fn from_paths(paths: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        let mut m = Self::default();
        for (a, c, s) in paths {
            m.abs_end.push(a);
            m.changes.push(c);
            m.sign_product.push(s);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.abs_end.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abs_end.is_empty()
    }

    fn columns(&self) -> [(&'static str, &[f64]); 3] {
        [
            ("|W(1)|", &self.abs_end),
            ("sign changes on [t0,1]", &self.changes),
            ("sign product", &self.sign_product),
        ]
    }

    /// KS distance of each marginal against `other`.
    pub fn distances(&self, other: &Marginals) -> [f64; 3] {
        let a = self.columns();
        let b = other.columns();
        [0, 1, 2].map(|i| ks_two_sample_distance(a[i].1, b[i].1))
    }
}

/// The marginals of one path.
pub fn path_marginals(path: &PathFunction, t0: f64) -> (f64, f64, f64) {
    (
        path.eval(1.0).abs(),
        count_sign_changes(path, t0, 1.0) as f64,
        f64::from(excursion_sign(path, t0) * excursion_sign(path, 1.0)),
    )
}

/// Zero visits at times `1..=n` of a +-1 walk from `a` to `b`, uniform over
/// all such paths.
pub fn bridge_zero_visits<R: Rng + ?Sized>(rng: &mut R, n: usize, a: i64, b: i64) -> Result<u32> {
    let d = b - a;
    if d.unsigned_abs() as usize > n || (n as i64 + d) % 2 != 0 {
        return Err(Error::Domain(format!("no {n}-step path from {a} to {b}")));
    }
    let mut ups = ((n as i64 + d) / 2) as usize;
    let mut x = a;
    let mut visits = 0;
    for left in (1..=n).rev() {
        if rng.random_range(0..left) < ups {
            ups -= 1;
            x += 1;
        } else {
            x -= 1;
        }
        if x == 0 {
            visits += 1;
        }
    }
    Ok(visits)
}

fn walk_marginals(cfg: &WalkConfig, samples: usize, seed: u64, t0: f64) -> Result<Marginals> {
    let n = cfg.n;
    let rows = run_walk_ensemble(cfg, samples, seed, |_, rec| {
        path_marginals(&scaled_path(&rec, n), t0)
    })?;
    Ok(Marginals::from_paths(rows))
}

struct SamplerRun {
    marginals: Marginals,
    half: Vec<f64>,
    end: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn sampler_run(
    samples: usize,
    seed: u64,
    grid: usize,
    c: f64,
    sigma: f64,
    intensity: Intensity,
    truncation: f64,
    t0: f64,
) -> Result<SamplerRun> {
    let rows: Vec<((f64, f64, f64), f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s =
                sample_quasi_reflected(&mut stream(seed, i as u64), grid, c, sigma, intensity, truncation)?;
            Ok((path_marginals(&s.path, t0), s.path.eval(0.5), s.path.eval(1.0)))
        })
        .collect::<Result<_>>()?;
    Ok(SamplerRun {
        marginals: Marginals::from_paths(rows.iter().map(|r| r.0)),
        half: rows.iter().map(|r| r.1).collect(),
        end: rows.iter().map(|r| r.2).collect(),
    })
}

fn regime_label(r: WalkRegime) -> &'static str {
    match r {
        WalkRegime::Shrinking => "shrinking",
        WalkRegime::DoubleArray => "double array",
    }
}

/// Le Cam, sign chain and bridge tail identities on random inputs.
pub fn criterion_1(cfg: &AcceptanceConfig) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();

    let start = Instant::now();
    let mut rng = stream(cfg.seed_for("c1.le_cam"), 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.exact_inputs {
        let len = rng.random_range(1..=40);
        let pmax: f64 = rng.random();
        let p: Vec<f64> = (0..len).map(|_| pmax * rng.random::<f64>()).collect();
        let (tv, bound) = le_cam_bound(&p)?;
        worst = worst.max(tv - bound);
    }
    out.push(
        TestReport::new("1 le_cam tv - 2 sum p^2", worst, 1e-12)
            .with_detail(format!("{} random inputs", cfg.exact_inputs))
            .timed(start),
    );

    let start = Instant::now();
    let mut rng = stream(cfg.seed_for("c1.chain"), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.exact_inputs {
        let len = rng.random_range(0..=10usize);
        let p: Vec<f64> = (0..len).map(|_| rng.random()).collect();
        let mut enumerated = 0.0;
        for mask in 0u32..(1 << len) {
            let prob: f64 = (0..len)
                .map(|j| if mask >> j & 1 == 1 { p[j] } else { 1.0 - p[j] })
                .product();
            if mask.count_ones() % 2 == 0 {
                enumerated += prob;
            }
        }
        worst = worst.max((chain_plus_probability(&p) - enumerated).abs());
    }
    out.push(TestReport::new("1 sign chain vs path enumeration", worst, 1e-12).timed(start));

    let start = Instant::now();
    let mut rng = stream(cfg.seed_for("c1.bridge"), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.exact_inputs {
        let a = rng.random_range(0.01..2.0);
        let b = rng.random_range(0.01..2.0);
        let sigma = rng.random_range(0.5..2.0);
        let t0 = rng.random_range(0.0..1.0);
        let dt = rng.random_range(0.5..3.0);
        let y = rng.random_range(0.0..3.0);
        let opposite = bridge_local_time_tail(a, -b, t0, t0 + dt, sigma, 0.0)?;
        let centred = bridge_local_time_tail(0.0, 0.0, 0.0, 1.0, 1.0, y)?;
        let same_side = bridge_local_time_tail(a, b, t0, t0 + dt, sigma, 0.0)?;
        worst = worst
            .max((opposite - 1.0).abs())
            .max((centred - (-y * y / 2.0).exp()).abs())
            .max((same_side - (-2.0 * a * b / (sigma * sigma * dt)).exp()).abs());
    }
    out.push(TestReport::new("1 bridge local time tail identities", worst, 1e-12).timed(start));
    Ok(out)
}

/// Walk with `alpha_n = n^(-1/4)`: two-time sign statistic of Brownian motion.
pub fn criterion_2(cfg: &AcceptanceConfig) -> Result<Vec<TestReport>> {
    let n = cfg.walk_n;
    let target = std::f64::consts::FRAC_1_PI * (0.5f64).sqrt().acos();
    let mut out = Vec::new();
    for regime in [WalkRegime::Shrinking, WalkRegime::DoubleArray] {
        let start = Instant::now();
        let wc = WalkConfig::new(regime, AlphaSchedule::Power { c: 1.0, beta: 0.25 }, n)?;
        let seed = cfg.seed_for(&format!("c2.{}", regime_label(regime)));
        let flips = run_walk_ensemble(&wc, cfg.walk_samples, seed, |_, rec| {
            rec.position[n / 2] * rec.position[n] < 0.0
        })?;
        let p = flips.iter().filter(|f| **f).count() as f64 / flips.len() as f64;
        out.push(
            TestReport::new(
                format!("2 walk n^-1/4 P(S(1/2)S(1)<0) ({})", regime_label(regime)),
                (p - target).abs(),
                0.02,
            )
            .with_value(p)
            .with_detail(format!("estimate {p:.4}, target {target:.4}"))
            .timed(start),
        );
    }
    Ok(out)
}

/// Walk with `alpha_n = 1/n`: no late sign changes, Gaussian endpoint.
pub fn criterion_3(cfg: &AcceptanceConfig) -> Result<Vec<TestReport>> {
    let n = cfg.walk_n;
    let mut out = Vec::new();
    for regime in [WalkRegime::Shrinking, WalkRegime::DoubleArray] {
        let start = Instant::now();
        let wc = WalkConfig::new(regime, AlphaSchedule::Power { c: 1.0, beta: 1.0 }, n)?;
        let seed = cfg.seed_for(&format!("c3.{}", regime_label(regime)));
        let rows = run_walk_ensemble(&wc, cfg.walk_samples, seed, |_, rec| {
            let path = scaled_path(&rec, n);
            (count_sign_changes(&path, 0.5, 1.0) > 0, path.eval(1.0))
        })?;
        let p = rows.iter().filter(|r| r.0).count() as f64 / rows.len() as f64;
        out.push(
            TestReport::new(
                format!("3 walk 1/n P(sign change on [1/2,1]) ({})", regime_label(regime)),
                p,
                0.02,
            )
            .timed(start),
        );
        let ends: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let normal = |x: f64| gaussian_marginal_cdf(1.0, 1.0, x);
        out.push(
            ks_one_sample(
                &format!("3 walk 1/n W(1) vs N(0,1) KS ({})", regime_label(regime)),
                &ends,
                &normal,
                0.025,
            )?
            .timed(start),
        );
    }
    Ok(out)
}

/// Intermediate results of criterion 4, reused by criterion 5.
pub struct Criterion4 {
    pub reports: Vec<TestReport>,
    pub shrinking_walk: Marginals,
    pub qrbm_distances: [f64; 3],
}

/// Walk with `alpha_n = c / sqrt(n)` against the QRBM / qRBM samplers.
pub fn criterion_4(cfg: &AcceptanceConfig) -> Result<Criterion4> {
    let c = 1.0;
    let t0 = cfg.observe_t0;
    let mut reports = Vec::new();
    let mut shrinking_walk = Marginals::default();
    let mut qrbm_distances = [0.0; 3];
    for (regime, intensity, label) in [
        (WalkRegime::Shrinking, Intensity::LocalTimeOverSqrtT, "QRBM"),
        (WalkRegime::DoubleArray, Intensity::LocalTime, "qRBM"),
    ] {
        let start = Instant::now();
        let wc = WalkConfig::new(regime, AlphaSchedule::InvSqrt { c }, cfg.walk_n)?;
        let walk = walk_marginals(
            &wc,
            cfg.walk_samples,
            cfg.seed_for(&format!("c4.walk.{label}")),
            t0,
        )?;
        let truncation = match intensity {
            Intensity::LocalTime => 0.0,
            Intensity::LocalTimeOverSqrtT => default_truncation(cfg.grid_n),
        };
        let limit = sampler_run(
            cfg.walk_samples,
            cfg.seed_for(&format!("c4.sampler.{label}")),
            cfg.grid_n,
            c,
            1.0,
            intensity,
            truncation,
            t0,
        )?
        .marginals;
        let d = walk.distances(&limit);
        for (i, (name, _)) in walk.columns().iter().enumerate() {
            reports.push(
                TestReport::new(
                    format!("4 walk ({}) vs {label}(1,1): {name} KS", regime_label(regime)),
                    d[i],
                    0.03,
                )
                .timed(start),
            );
        }
        if regime == WalkRegime::Shrinking {
            qrbm_distances = d;
            shrinking_walk = walk;
        }
    }
    Ok(Criterion4 {
        reports,
        shrinking_walk,
        qrbm_distances,
    })
}

/// Sampler marginals, self-similarity and insensitivity to the truncation time.
pub fn criterion_5(cfg: &AcceptanceConfig, c4: &Criterion4) -> Result<Vec<TestReport>> {
    let (c, sigma) = (1.0, 1.3);
    let grid = cfg.grid_n;
    let t0 = cfg.observe_t0;
    let normal = move |x: f64| gaussian_marginal_cdf(1.0, sigma, x);
    let mut out = Vec::new();

    let start = Instant::now();
    let q = sampler_run(
        cfg.walk_samples,
        cfg.seed_for("c5.qrbm"),
        grid,
        c,
        sigma,
        Intensity::LocalTime,
        0.0,
        t0,
    )?;
    out.push(ks_one_sample("5 qRBM(1,1.3) Q(1) vs N(0,1.69) KS", &q.end, &normal, 0.02)?.timed(start));

    let start = Instant::now();
    let big = sampler_run(
        cfg.walk_samples,
        cfg.seed_for("c5.big_qrbm"),
        grid,
        c,
        sigma,
        Intensity::LocalTimeOverSqrtT,
        default_truncation(grid),
        t0,
    )?;
    out.push(ks_one_sample("5 QRBM(1,1.3) Q(1) vs N(0,1.69) KS", &big.end, &normal, 0.02)?.timed(start));

    let start = Instant::now();
    let other = sampler_run(
        cfg.walk_samples,
        cfg.seed_for("c5.big_qrbm.half"),
        grid,
        c,
        sigma,
        Intensity::LocalTimeOverSqrtT,
        default_truncation(grid),
        t0,
    )?;
    let rescaled: Vec<f64> = other.half.iter().map(|x| x / 0.5f64.sqrt()).collect();
    out.push(ks_two_sample("5 QRBM Q(1/2)/sqrt(1/2) vs Q(1) KS", &rescaled, &big.end, 0.03)?.timed(start));

    // same streams as criterion 4, truncation halved
    let start = Instant::now();
    let halved = sampler_run(
        cfg.walk_samples,
        cfg.seed_for("c4.sampler.QRBM"),
        grid,
        1.0,
        1.0,
        Intensity::LocalTimeOverSqrtT,
        default_truncation(grid) / 2.0,
        t0,
    )?
    .marginals;
    let d = c4.shrinking_walk.distances(&halved);
    let shift = (0..3)
        .map(|i| (d[i] - c4.qrbm_distances[i]).abs())
        .fold(0.0, f64::max);
    out.push(
        TestReport::new("5 QRBM truncation halved: max change of case-4 KS", shift, 0.01)
            .with_detail(format!("distances {:?} -> {:?}", c4.qrbm_distances, d))
            .timed(start),
    );
    Ok(out)
}

/// Local time of a pinned walk against the Brownian bridge local-time law.
pub fn criterion_6(cfg: &AcceptanceConfig) -> Result<Vec<TestReport>> {
    let start = Instant::now();
    let n = cfg.walk_n;
    let rn = (n as f64).sqrt();
    let a = (0.5 * rn).round() as i64;
    let b = a;
    let seed = cfg.seed_for("c6.bridge");
    let scale = 1.0 / (LATTICE_LOCAL_TIME_NORMALIZER * rn);
    let l: Vec<f64> = (0..cfg.bridge_samples)
        .into_par_iter()
        .map(|i| bridge_zero_visits(&mut stream(seed, i as u64), n, a, b).map(|v| v as f64 * scale))
        .collect::<Result<_>>()?;
    let (af, bf) = (a as f64 / rn, b as f64 / rn);
    let tail = move |y: f64| bridge_local_time_tail(af, bf, 0.0, 1.0, 1.0, y.max(0.0)).unwrap_or(1.0);
    let law = WithAtom {
        cdf: move |y: f64| if y < 0.0 { 0.0 } else { 1.0 - tail(y) },
        at: 0.0,
        mass: 1.0 - tail(0.0),
    };
    Ok(vec![ks_one_sample(
        "6 pinned walk local time vs bridge law KS",
        &l,
        &law,
        0.05,
    )?
    .with_detail(format!("a = b = {a}, n = {n}"))
    .timed(start)])
}

/// Billiard checks on the reference lattice.
pub fn criterion_7(cfg: &AcceptanceConfig, lorentz: &LorentzConfig) -> Result<Vec<TestReport>> {
    let n = cfg.billiard_n;
    let rn = (n as f64).sqrt();
    let mut out = Vec::new();

    let start = Instant::now();
    let wall = HoleSchedule::new(
        Regime::DoubleArray,
        AlphaSchedule::Power { c: 1.0, beta: 0.25 },
        CrossingMode::Geometric,
    );
    let per = HoleSchedule::no_wall();
    let seed = cfg.seed_for("c7.pair");
    struct Row {
        mirror_gap: f64,
        s_n: f64,
        x_n: f64,
        l_n: f64,
        flipped: bool,
    }
    let rows: Vec<Row> = (0..cfg.billiard_samples)
        .into_par_iter()
        .map(|i| {
            let a = run_trajectory(&mut stream(seed, i as u64), lorentz, &per, n)?;
            let b = run_trajectory(&mut stream(seed, i as u64), lorentz, &wall, n)?;
            let mirror_gap = a
                .position
                .iter()
                .zip(&b.position)
                .map(|(x, y)| (x.abs() - y.abs()).abs())
                .fold(0.0, f64::max);
            Ok(Row {
                mirror_gap,
                s_n: a.s[n],
                x_n: a.position[n],
                l_n: f64::from(a.l[n]),
                flipped: b.position[n / 2] * b.position[n] < 0.0,
            })
        })
        .collect::<Result<_>>()?;
    let gap = rows.iter().map(|r| r.mirror_gap).fold(0.0, f64::max);
    out.push(TestReport::new("7a mirror coupling max ||S_wall| - |S_per||", gap, 0.0).timed(start));

    let start = Instant::now();
    let s_n: Vec<f64> = rows.iter().map(|r| r.s_n).collect();
    let sigma_n = estimate_sigma(&s_n, n)?;
    let long_seed = cfg.seed_for("c7.long");
    let s_4n: Vec<f64> = (0..cfg.billiard_samples)
        .into_par_iter()
        .map(|i| run_trajectory(&mut stream(long_seed, i as u64), lorentz, &per, 4 * n).map(|r| r.s[4 * n]))
        .collect::<Result<_>>()?;
    let sigma_4n = estimate_sigma(&s_4n, 4 * n)?;
    let ratio = sigma_4n / sigma_n;
    out.push(
        TestReport::new(
            "7b sigma ratio 4n / n, |log ratio|",
            ratio.ln().abs(),
            1.25f64.ln(),
        )
        .with_value(ratio)
        .with_detail(format!(
            "sigma(n) = {sigma_n:.4}, sigma(4n) = {sigma_4n:.4}, ratio {ratio:.4}"
        ))
        .timed(start),
    );

    let start = Instant::now();
    let p = rows.iter().filter(|r| r.flipped).count() as f64 / rows.len() as f64;
    out.push(
        TestReport::new("7c billiard n^-1/4 P(S(1/2)S(1)<0)", (p - 0.25).abs(), 0.05)
            .with_value(p)
            .with_detail(format!("estimate {p:.4}"))
            .timed(start),
    );

    out.push(llt_check(
        "7d billiard LLT at b = 0 (SE units)",
        &s_n,
        n,
        0.0,
        sigma_n,
        1.0,
    )?);

    let start = Instant::now();
    let abs_x: Vec<f64> = rows.iter().map(|r| r.x_n.abs() / rn).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.l_n / rn).collect();
    let corr = correlation(&abs_x, &l);
    out.push(
        TestReport::new("7e corr(|S_n|, L_n) is negative", corr, 0.0)
            .with_detail(format!("Pearson {corr:.4}"))
            .timed(start),
    );
    let start = Instant::now();
    let l_raw: Vec<f64> = rows.iter().map(|r| r.l_n).collect();
    let c0 = estimate_c0(&l_raw, n, sigma_n)?;
    // local time at 1 of standard Brownian motion is |N(0,1)| in law
    let mut rng = stream(cfg.seed_for("c7.oracle"), 0);
    let oracle: Vec<f64> = (0..cfg.oracle_samples)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            c0 * z.abs() / sigma_n
        })
        .collect();
    out.push(
        ks_two_sample("7e L_n/sqrt(n) vs c0 * Brownian local time KS", &l, &oracle, 0.05)?
            .with_detail(format!("c0 = {c0:.4}"))
            .timed(start),
    );
    Ok(out)
}

/// Geometric holes against the trapdoor on the billiard with shrinking holes.
pub fn criterion_8(cfg: &AcceptanceConfig, lorentz: &LorentzConfig) -> Result<Vec<TestReport>> {
    let start = Instant::now();
    let n = cfg.billiard_n;
    let t0 = cfg.observe_t0;
    let alpha = AlphaSchedule::InvSqrt { c: cfg.trapdoor_c };
    let geometric = HoleSchedule::new(Regime::Shrinking, alpha, CrossingMode::Geometric);
    let trapdoor = HoleSchedule::new(Regime::Shrinking, alpha, CrossingMode::Trapdoor);
    let per = HoleSchedule::no_wall();
    let seed = cfg.seed_for("c8.billiard");
    type Row = ((f64, f64, f64), (f64, f64, f64), f64, f64);
    let rows: Vec<Row> = (0..cfg.trapdoor_samples)
        .into_par_iter()
        .map(|i| {
            let p = run_trajectory(&mut stream(seed, i as u64), lorentz, &per, n)?;
            let g = run_trajectory(&mut stream(seed, i as u64), lorentz, &geometric, n)?;
            let t = run_trajectory(&mut stream(seed, i as u64), lorentz, &trapdoor, n)?;
            Ok((
                path_marginals(&scaled_path(&g, n), t0),
                path_marginals(&scaled_path(&t, n), t0),
                p.s[n],
                f64::from(p.l[n]),
            ))
        })
        .collect::<Result<_>>()?;
    let geo = Marginals::from_paths(rows.iter().map(|r| r.0));
    let trap = Marginals::from_paths(rows.iter().map(|r| r.1));
    let s_n: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let l_n: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let sigma = estimate_sigma(&s_n, n)?;
    let c0 = estimate_c0(&l_n, n, sigma)?;
    let intensity = cfg.trapdoor_c * c0 / lorentz.wall.c1();
    let limit = sampler_run(
        cfg.walk_samples,
        cfg.seed_for("c8.sampler"),
        cfg.grid_n,
        intensity,
        sigma,
        Intensity::LocalTimeOverSqrtT,
        default_truncation(cfg.grid_n),
        t0,
    )?
    .marginals;
    let dg = geo.distances(&limit);
    let dt = trap.distances(&limit);
    let names = geo.columns().map(|c| c.0);
    Ok((0..3)
        .map(|i| {
            TestReport::new(
                format!("8 trapdoor vs geometric: change of {} KS", names[i]),
                (dg[i] - dt[i]).abs(),
                0.01,
            )
            .with_detail(format!(
                "KS to QRBM({intensity:.3},{sigma:.3}): geometric {:.4}, trapdoor {:.4}",
                dg[i], dt[i]
            ))
            .timed(start)
        })
        .collect())
}

/// Runs every criterion in order.
pub fn run_all(cfg: &AcceptanceConfig, lorentz: &LorentzConfig) -> Result<Vec<TestReport>> {
    let mut out = criterion_1(cfg)?;
    out.extend(criterion_2(cfg)?);
    out.extend(criterion_3(cfg)?);
    let c4 = criterion_4(cfg)?;
    out.extend(c4.reports.iter().cloned());
    out.extend(criterion_5(cfg, &c4)?);
    out.extend(criterion_6(cfg)?);
    out.extend(criterion_7(cfg, lorentz)?);
    out.extend(criterion_8(cfg, lorentz)?);
    Ok(out)
}

/// One line per report.
pub fn format_report(r: &TestReport) -> String {
    format!(
        "{} {:<60} statistic {:>10.5} threshold {:>8.5}  {}",
        if r.pass { "PASS" } else { "FAIL" },
        r.name,
        r.statistic,
        r.threshold,
        r.detail
    )
}
