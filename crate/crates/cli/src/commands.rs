use std::path::Path;

use anyhow::Result;
use lorentz_core::acceptance::{format_report, run_all};
use lorentz_core::limit::{sample_quasi_reflected, Intensity};
use lorentz_core::rng::stream;
use lorentz_core::sim::{local_time_path, run_ensemble, scaled_path};
use lorentz_core::stats::{estimate_c0, estimate_sigma};
use lorentz_core::walk::run_walk_ensemble;
use lorentz_core::TrajectoryRecord;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{RunDir, Stamp};

#[derive(Serialize)]
struct Summary<S: Serialize> {
    command: &'static str,
    format_version: u32,
    config_hash: String,
    seed: u64,
    samples: usize,
    #[serde(flatten)]
    stats: S,
}

fn open(cfg: &ExperimentConfig, command: &'static str, out: &Path) -> Result<RunDir> {
    let stamp = Stamp {
        command,
        config_hash: cfg.hash(),
        seed: cfg.seed,
    };
    let run = RunDir::create(out, stamp)?;
    let mut stored = cfg.clone();
    stored.output_dir = None;
    run.write_config(&stored.to_toml())?;
    Ok(run)
}

fn summary<S: Serialize>(run: &RunDir, samples: usize, stats: S) -> Summary<S> {
    let stamp = run.stamp();
    Summary {
        command: stamp.command,
        format_version: crate::output::FORMAT_VERSION,
        config_hash: stamp.config_hash.clone(),
        seed: stamp.seed,
        samples,
        stats,
    }
}

/// Per-sample values kept after the record is dropped.
struct Endpoint {
    s_n: f64,
    position_n: f64,
    l_n: u32,
    crossings: usize,
    wall_hits: usize,
    record: Option<TrajectoryRecord>,
}

fn endpoint(keep: usize, n: usize) -> impl Fn(usize, TrajectoryRecord) -> Endpoint + Sync {
    move |i, rec| Endpoint {
        s_n: rec.s[n],
        position_n: rec.position[n],
        l_n: rec.l[n],
        crossings: rec.crossing_steps.len(),
        wall_hits: rec.wall_hits,
        record: (i < keep).then_some(rec),
    }
}

#[derive(Serialize)]
struct TrajectoryStats {
    n: usize,
    regime: String,
    alpha_family: &'static str,
    alpha_at_n: f64,
    sigma_hat: Option<f64>,
    c0_hat: Option<f64>,
    mean_abs_w1: f64,
    mean_scaled_l: f64,
    mean_crossings: f64,
    mean_wall_hits: f64,
}

fn write_trajectories(
    run: &RunDir,
    cfg: &ExperimentConfig,
    regime: String,
    alpha_at_n: f64,
    ends: Vec<Endpoint>,
) -> Result<()> {
    let n = cfg.n;
    let root = (n as f64).sqrt();
    for (i, e) in ends.iter().enumerate() {
        if let Some(rec) = &e.record {
            let name = format!("sample_{i:05}");
            run.write_record(&name, rec)?;
            run.write_path(&format!("{name}_w"), &scaled_path(rec, n))?;
            run.write_path(&format!("{name}_local_time"), &local_time_path(rec, n))?;
        }
    }
    run.write_table(
        "endpoints",
        "sample,S,position,L,crossings,wall_hits",
        ends.iter().enumerate().map(|(i, e)| {
            format!(
                "{i},{},{},{},{},{}",
                e.s_n, e.position_n, e.l_n, e.crossings, e.wall_hits
            )
        }),
    )?;
    let s_n: Vec<f64> = ends.iter().map(|e| e.s_n).collect();
    let l_n: Vec<f64> = ends.iter().map(|e| f64::from(e.l_n)).collect();
    let sigma_hat = estimate_sigma(&s_n, n).ok();
    let c0_hat = sigma_hat.and_then(|s| estimate_c0(&l_n, n, s).ok());
    let m = ends.len() as f64;
    let stats = TrajectoryStats {
        n,
        regime,
        alpha_family: cfg.schedule.alpha.name(),
        alpha_at_n,
        sigma_hat,
        c0_hat,
        mean_abs_w1: ends.iter().map(|e| e.position_n.abs() / root).sum::<f64>() / m,
        mean_scaled_l: l_n.iter().map(|l| l / root).sum::<f64>() / m,
        mean_crossings: ends.iter().map(|e| e.crossings as f64).sum::<f64>() / m,
        mean_wall_hits: ends.iter().map(|e| e.wall_hits as f64).sum::<f64>() / m,
    };
    run.write_json("summary.json", &summary(run, ends.len(), stats))
}

fn regime_name<T: Serialize>(r: &T) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

pub fn simulate_lorentz(cfg: &ExperimentConfig) -> Result<()> {
    let out = cfg.out_dir()?;
    let (lorentz, schedule) = cfg.lorentz()?;
    let run = open(cfg, "simulate-lorentz", &out)?;
    let ends = run_ensemble(
        &lorentz,
        &schedule,
        cfg.n,
        cfg.samples,
        cfg.seed,
        endpoint(cfg.record_limit, cfg.n),
    )?;
    write_trajectories(
        &run,
        cfg,
        regime_name(&schedule.regime),
        schedule.hole_size(cfg.n, cfg.n),
        ends,
    )?;
    run.commit()?;
    Ok(())
}

pub fn simulate_walk(cfg: &ExperimentConfig) -> Result<()> {
    let out = cfg.out_dir()?;
    let walk = cfg.walk()?;
    let run = open(cfg, "simulate-walk", &out)?;
    let ends = run_walk_ensemble(&walk, cfg.samples, cfg.seed, endpoint(cfg.record_limit, cfg.n))?;
    write_trajectories(&run, cfg, regime_name(&walk.regime), walk.epsilon(cfg.n), ends)?;
    run.commit()?;
    Ok(())
}

#[derive(Serialize)]
struct LimitStats {
    grid_n: usize,
    intensity: Intensity,
    c: f64,
    sigma: f64,
    t0: f64,
    mean_abs_x1: f64,
    mean_l1: f64,
    mean_points: f64,
    positive_at_one: f64,
}

struct LimitEnd {
    x1: f64,
    l1: f64,
    points: usize,
    eta: bool,
}

pub fn sample_limit(cfg: &ExperimentConfig) -> Result<()> {
    let out = cfg.out_dir()?;
    cfg.validate_limit()?;
    let lim = &cfg.limit;
    let t0 = match lim.intensity {
        Intensity::LocalTime => 0.0,
        Intensity::LocalTimeOverSqrtT => cfg.truncation(),
    };
    let run = open(cfg, "sample-limit", &out)?;
    let ends: Vec<LimitEnd> = {
        use rayon::prelude::*;
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| -> Result<LimitEnd> {
                let s = sample_quasi_reflected(
                    &mut stream(cfg.seed, i as u64),
                    cfg.grid_n,
                    lim.c,
                    lim.sigma,
                    lim.intensity,
                    t0,
                )?;
                if i < cfg.record_limit {
                    let name = format!("sample_{i:05}");
                    run.write_path(&format!("{name}_x"), &s.path)?;
                    run.write_path(&format!("{name}_local_time"), &s.backbone.local_time)?;
                }
                Ok(LimitEnd {
                    x1: s.path.eval(1.0),
                    l1: s.backbone.local_time.eval(1.0),
                    points: s.points.points.len(),
                    eta: s.eta,
                })
            })
            .collect::<Result<_>>()?
    };
    run.write_table(
        "endpoints",
        "sample,X1,local_time,points,eta",
        ends.iter()
            .enumerate()
            .map(|(i, e)| format!("{i},{},{},{},{}", e.x1, e.l1, e.points, u8::from(e.eta))),
    )?;
    let m = ends.len() as f64;
    let stats = LimitStats {
        grid_n: cfg.grid_n,
        intensity: lim.intensity,
        c: lim.c,
        sigma: lim.sigma,
        t0,
        mean_abs_x1: ends.iter().map(|e| e.x1.abs()).sum::<f64>() / m,
        mean_l1: ends.iter().map(|e| e.l1).sum::<f64>() / m,
        mean_points: ends.iter().map(|e| e.points as f64).sum::<f64>() / m,
        positive_at_one: ends.iter().filter(|e| e.x1 > 0.0).count() as f64 / m,
    };
    run.write_json("summary.json", &summary(&run, ends.len(), stats))?;
    run.commit()?;
    Ok(())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    name: &'a str,
    statistic: f64,
    threshold: f64,
    pass: bool,
    seed: u64,
    config_hash: &'a str,
    p_value: Option<f64>,
    value: f64,
    detail: &'a str,
}

#[derive(Serialize)]
struct VerifyStats {
    passed: usize,
    failed: usize,
    failures: Vec<String>,
}

/// Runs the acceptance suite; `Ok(false)` when some check failed.
pub fn verify(cfg: &ExperimentConfig) -> Result<bool> {
    let out = cfg.out_dir()?;
    let (lorentz, _) = cfg.lorentz()?;
    let run = open(cfg, "verify", &out)?;
    let reports = run_all(&cfg.verify, &lorentz)?;
    let hash = run.stamp().config_hash.clone();
    for (i, r) in reports.iter().enumerate() {
        println!("{}", format_report(r));
        let file = ReportFile {
            name: &r.name,
            statistic: r.statistic,
            threshold: r.threshold,
            pass: r.pass,
            seed: cfg.seed,
            config_hash: &hash,
            p_value: r.p_value,
            value: r.value,
            detail: &r.detail,
        };
        run.write_json(&format!("reports/{i:02}_{}.json", slug(&r.name)), &file)?;
    }
    let failures: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.clone())
        .collect();
    let stats = VerifyStats {
        passed: reports.len() - failures.len(),
        failed: failures.len(),
        failures,
    };
    println!("{} of {} checks passed", stats.passed, reports.len());
    let ok = stats.failed == 0;
    run.write_json("summary.json", &summary(&run, reports.len(), stats))?;
    run.commit()?;
    Ok(ok)
}

fn slug(name: &str) -> String {
    let mut s = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            s.push(ch.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
        if s.len() >= 48 {
            break;
        }
    }
    s.trim_matches('_').to_owned()
}
