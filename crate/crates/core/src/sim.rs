//! Trajectories of the Lorentz process with a wall, and their diffusive scaling.
//!
//! The default stepper uses the mirror coupling: the particle in the
//! symmetric array with a wall is the wall-free particle reflected through
//! `x = 0` after every refused crossing. With the wall-free trajectory as the
//! driver, `|position|` is bit-for-bit the same with and without the wall.
//! [`WallDynamics::Direct`] instead reflects the particle off the wall
//! segment physically and is kept as an independent check.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::MAX_WALL_CHATTER;
use crate::error::{Error, Result};
use crate::geometry::{
    billiard_map, next_collision, BoundaryMode, HitObject, HorizonSweep, ParticleState, ScattererLattice,
    Vec2,
};
use crate::path::{Interpolation, PathFunction};
use crate::rng::stream;
use crate::wall::{decide_crossing, HoleSchedule, Regime, WallConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallDynamics {
    #[default]
    Mirror,
    Direct,
}

/// A validated billiard with its wall.
#[derive(Clone, Debug)]
pub struct LorentzConfig {
    pub lattice: ScattererLattice,
    pub wall: WallConfig,
    /// Certified bound on free flights.
    pub max_free_path: f64,
    /// Count wall reflections as steps (literal dynamics) instead of skipping them.
    pub count_wall_hits: bool,
    pub dynamics: WallDynamics,
}

impl LorentzConfig {
    /// Validates symmetry, finite horizon and derives the wall.
    pub fn new(lattice: ScattererLattice, sweep: HorizonSweep) -> Result<Self> {
        let bound = lattice.validate_finite_horizon_with(sweep)?;
        Self::with_bound(lattice, bound)
    }

    /// As [`LorentzConfig::new`] but trusts a previously certified free-path bound.
    pub fn with_bound(lattice: ScattererLattice, max_free_path: f64) -> Result<Self> {
        if !lattice.validate_symmetry() {
            return Err(Error::InvalidLattice(
                "scatterers are not symmetric about x = 0".into(),
            ));
        }
        if !(max_free_path > 0.0 && max_free_path.is_finite()) {
            return Err(Error::InvalidLattice(format!(
                "bad free path bound {max_free_path}"
            )));
        }
        let wall = WallConfig::from_lattice(&lattice)?;
        Ok(Self {
            lattice,
            wall,
            max_free_path,
            count_wall_hits: false,
            dynamics: WallDynamics::Mirror,
        })
    }

    /// The shipped fixture lattice with its recorded free-path bound.
    pub fn reference() -> Self {
        Self::with_bound(ScattererLattice::reference(), REFERENCE_MAX_FREE_PATH)
            .expect("reference configuration is valid")
    }
}

/// Certified free-path bound of [`ScattererLattice::reference`]
/// (default sweep; checked in `tests/geometry.rs`).
pub const REFERENCE_MAX_FREE_PATH: f64 = 1.579_866_704_1;

/// Per-collision record of one trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Horizontal increments, one per counted step.
    pub kappa: Vec<f64>,
    /// Running sums of `kappa`; `s[0] = 0`.
    pub s: Vec<f64>,
    /// Horizontal coordinate relative to the wall; `position[k] = position[0] + s[k]`
    /// up to rounding.
    pub position: Vec<f64>,
    /// Visits to the wall components up to step `k`; `l[0] = 0`.
    pub l: Vec<u32>,
    /// Steps whose flight went through the wall.
    pub crossing_steps: Vec<usize>,
    /// Refused crossings (reflections off the wall).
    pub wall_hits: usize,
    /// Hole size in force at each step (NaN without a wall).
    pub alpha: Vec<f64>,
    /// Collision points of the simulated particle, `hit_points[0]` the start.
    pub hit_points: Vec<Vec2>,
}

impl TrajectoryRecord {
    fn with_capacity(n: usize) -> Self {
        Self {
            kappa: Vec::with_capacity(n),
            s: Vec::with_capacity(n + 1),
            position: Vec::with_capacity(n + 1),
            l: Vec::with_capacity(n + 1),
            crossing_steps: Vec::new(),
            wall_hits: 0,
            alpha: Vec::with_capacity(n),
            hit_points: Vec::with_capacity(n + 1),
        }
    }

    pub(crate) fn start(n: usize, x0: f64, point: Option<Vec2>) -> Self {
        let mut r = Self::with_capacity(n);
        r.s.push(0.0);
        r.position.push(x0);
        r.l.push(0);
        if let Some(p) = point {
            r.hit_points.push(p);
        }
        r
    }

    pub(crate) fn push(&mut self, position: f64, visits: u32, alpha: f64) {
        let prev = *self.position.last().expect("record started");
        let kappa = position - prev;
        let s = self.s.last().expect("record started") + kappa;
        self.kappa.push(kappa);
        self.s.push(s);
        self.position.push(position);
        self.l.push(visits);
        self.alpha.push(alpha);
    }

    /// Number of counted steps.
    pub fn steps(&self) -> usize {
        self.kappa.len()
    }

    /// Per-step crossing flags (index `k - 1` for step `k`).
    pub fn crossed_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.steps()];
        for &k in &self.crossing_steps {
            flags[k - 1] = true;
        }
        flags
    }
}

/// Initial point drawn from the normalized Liouville measure restricted to
/// the two cells next to the wall: position uniform in arclength on the
/// boundary with `x` in `[-1, 1]`, outgoing angle with density `cos(phi)/2`.
pub fn sample_initial_state<R: Rng + ?Sized>(rng: &mut R, config: &LorentzConfig) -> ParticleState {
    let lattice = &config.lattice;
    let strip = lattice.boundary_mode() == BoundaryMode::ReflectingStrip;
    let disk_len: Vec<f64> = lattice.disks().iter().map(|d| 2.0 * PI * d.radius).collect();
    let flat_len = if strip { 2.0 } else { 0.0 };
    let total: f64 = disk_len.iter().sum::<f64>() + flat_len;
    loop {
        let cell = rng.random_range(-2..=1i64);
        let mut u = rng.random::<f64>() * total;
        let mut chosen = None;
        for (index, &len) in disk_len.iter().enumerate() {
            if u < len {
                chosen = Some(index);
                break;
            }
            u -= len;
        }
        let (q, n, on) = match chosen {
            Some(index) => {
                let d = lattice.disks()[index];
                let n = Vec2::from_angle(2.0 * PI * u / disk_len[index]);
                (
                    d.center + Vec2::new(cell as f64, 0.0) + n * d.radius,
                    n,
                    HitObject::Disk {
                        index,
                        cell: (cell, 0),
                    },
                )
            }
            // floor for u in [0, 1), ceiling for u in [1, 2)
            None if u < 1.0 => (
                Vec2::new(cell as f64 + u, 0.0),
                Vec2::new(0.0, 1.0),
                HitObject::StripFloor,
            ),
            None => (
                Vec2::new(cell as f64 + (u - 1.0).min(1.0), 1.0),
                Vec2::new(0.0, -1.0),
                HitObject::StripCeiling,
            ),
        };
        let phi = (2.0 * rng.random::<f64>() - 1.0).asin();
        if (-1.0..=1.0).contains(&q.x) {
            return ParticleState::new(q, n.rotated(phi), Some(on));
        }
    }
}

/// Height at which the chord `a -> b` passes `x = 0` inside an open wall
/// component, if it does.
pub fn wall_visit(config: &LorentzConfig, a: Vec2, b: Vec2) -> Option<f64> {
    if !(a.x * b.x < 0.0) {
        return None;
    }
    let w = -a.x / (b.x - a.x);
    let y = a.y + w * (b.y - a.y);
    let height = match config.lattice.boundary_mode() {
        BoundaryMode::VerticalTorus => y.rem_euclid(1.0),
        BoundaryMode::ReflectingStrip => y,
    };
    config.wall.in_open_component(height).then_some(height)
}

/// Simulates `n` counted steps under `schedule`.
pub fn run_trajectory<R: Rng + ?Sized>(
    rng: &mut R,
    config: &LorentzConfig,
    schedule: &HoleSchedule,
    n: usize,
) -> Result<TrajectoryRecord> {
    if n == 0 {
        return Err(Error::Domain("trajectory length must be at least 1".into()));
    }
    schedule.validate(&config.wall, n, n)?;
    let start = sample_initial_state(rng, config);
    match config.dynamics {
        WallDynamics::Mirror => run_mirror(rng, config, schedule, n, start),
        WallDynamics::Direct => run_direct(rng, config, schedule, n, start),
    }
}

fn run_mirror<R: Rng + ?Sized>(
    rng: &mut R,
    config: &LorentzConfig,
    schedule: &HoleSchedule,
    n: usize,
    mut state: ParticleState,
) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord::start(n, state.q.x, Some(state.q));
    let mut sign = 1.0;
    let mut visits = 0u32;
    while rec.steps() < n {
        let hole = rec.steps() + 1;
        let alpha = schedule.hole_size(hole, n);
        let ev = next_collision(&state, &config.lattice, config.max_free_path)?;
        if let Some(y) = wall_visit(config, state.q, ev.hit_point) {
            visits += 1;
            let crossed = decide_crossing(rng, schedule, &config.wall, hole, n, y)?;
            if crossed {
                rec.crossing_steps.push(hole);
            } else {
                sign = -sign;
                rec.wall_hits += 1;
                if config.count_wall_hits {
                    let wall_point = chord_at_wall(state.q, ev.hit_point);
                    rec.push(0.0, visits, alpha);
                    rec.hit_points.push(wall_point);
                    if rec.steps() == n {
                        break;
                    }
                }
            }
        }
        let alpha = schedule.hole_size(rec.steps() + 1, n);
        let (next, _) = billiard_map(&state, &config.lattice, config.max_free_path)?;
        state = next;
        rec.push(sign * state.q.x, visits, alpha);
        rec.hit_points.push(Vec2::new(sign * state.q.x, state.q.y));
    }
    Ok(rec)
}

fn chord_at_wall(a: Vec2, b: Vec2) -> Vec2 {
    let w = -a.x / (b.x - a.x);
    Vec2::new(0.0, a.y + w * (b.y - a.y))
}

fn run_direct<R: Rng + ?Sized>(
    rng: &mut R,
    config: &LorentzConfig,
    schedule: &HoleSchedule,
    n: usize,
    mut state: ParticleState,
) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord::start(n, state.q.x, Some(state.q));
    let mut visits = 0u32;
    while rec.steps() < n {
        let mut chatter = 0usize;
        loop {
            let hole = rec.steps() + 1;
            let alpha = schedule.hole_size(hole, n);
            let ev = next_collision(&state, &config.lattice, config.max_free_path)?;
            let Some(y) = wall_visit(config, state.q, ev.hit_point) else {
                let (next, _) = billiard_map(&state, &config.lattice, config.max_free_path)?;
                state = next;
                rec.push(state.q.x, visits, alpha);
                rec.hit_points.push(state.q);
                break;
            };
            visits += 1;
            if decide_crossing(rng, schedule, &config.wall, hole, n, y)? {
                rec.crossing_steps.push(hole);
                let (next, _) = billiard_map(&state, &config.lattice, config.max_free_path)?;
                state = next;
                rec.push(state.q.x, visits, alpha);
                rec.hit_points.push(state.q);
                break;
            }
            rec.wall_hits += 1;
            chatter += 1;
            if chatter > MAX_WALL_CHATTER {
                return Err(Error::StepBudgetExceeded { events: chatter });
            }
            let p = chord_at_wall(state.q, ev.hit_point);
            let v = Vec2::new(-state.v.x, state.v.y);
            state = ParticleState::new(p, v, Some(HitObject::Wall));
            if config.count_wall_hits {
                rec.push(0.0, visits, alpha);
                rec.hit_points.push(p);
                if rec.steps() == n {
                    break;
                }
            }
        }
    }
    Ok(rec)
}

/// Runs `samples` independent trajectories (sample `i` on stream `i` of
/// `seed`) and maps each record through `f` before dropping it.
pub fn run_ensemble<T, F>(
    config: &LorentzConfig,
    schedule: &HoleSchedule,
    n: usize,
    samples: usize,
    seed: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, TrajectoryRecord) -> T + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            run_trajectory(&mut rng, config, schedule, n).map(|rec| f(i, rec))
        })
        .collect()
}

/// `W_n(k/n) = position_k / sqrt(n)`, linearly interpolated.
pub fn scaled_path(record: &TrajectoryRecord, n: usize) -> PathFunction {
    assert!(record.steps() >= n && n >= 1, "record shorter than n");
    let scale = 1.0 / (n as f64).sqrt();
    let values = record.position[..=n].iter().map(|x| x * scale).collect();
    PathFunction::uniform(values, Interpolation::Linear)
}

/// `L_k / sqrt(n)` as a right-continuous step function on the grid `k/n`.
pub fn local_time_path(record: &TrajectoryRecord, n: usize) -> PathFunction {
    assert!(record.steps() >= n && n >= 1, "record shorter than n");
    let scale = 1.0 / (n as f64).sqrt();
    let values = record.l[..=n].iter().map(|&l| l as f64 * scale).collect();
    PathFunction::uniform(values, Interpolation::Step)
}

/// Whether `regime` runs have a wall at all.
pub fn has_wall(schedule: &HoleSchedule) -> bool {
    schedule.regime != Regime::NoWall
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wall::{AlphaSchedule, CrossingMode};

    fn shrinking(c: f64) -> HoleSchedule {
        HoleSchedule::new(
            Regime::Shrinking,
            AlphaSchedule::InvSqrt { c },
            CrossingMode::Geometric,
        )
    }

    #[test]
    fn initial_states_lie_on_the_boundary() {
        let cfg = LorentzConfig::reference();
        let mut rng = stream(11, 0);
        for _ in 0..2000 {
            let s = sample_initial_state(&mut rng, &cfg);
            assert!(s.is_unit_speed());
            assert!((-1.0..=1.0).contains(&s.q.x));
            let n = cfg.lattice.inward_normal(s.on.unwrap(), s.q);
            assert!(s.v.dot(n) >= 0.0);
            if let Some(HitObject::Disk { index, cell }) = s.on {
                let c = cfg.lattice.disk_center(index, cell);
                let r = cfg.lattice.disks()[index].radius;
                assert!(((s.q - c).norm() - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_wall_crosses_at_every_visit() {
        let cfg = LorentzConfig::reference();
        let rec = run_trajectory(&mut stream(5, 1), &cfg, &HoleSchedule::no_wall(), 2000).unwrap();
        let jumps: Vec<usize> = (1..=2000).filter(|&k| rec.l[k] > rec.l[k - 1]).collect();
        assert_eq!(rec.crossing_steps, jumps);
        assert_eq!(rec.wall_hits, 0);
        assert!(!jumps.is_empty());
    }

    #[test]
    fn closed_wall_confines() {
        let cfg = LorentzConfig::reference();
        let closed = HoleSchedule::new(
            Regime::Shrinking,
            AlphaSchedule::Const { alpha: 0.0 },
            CrossingMode::Geometric,
        );
        for i in 0..20 {
            let rec = run_trajectory(&mut stream(6, i), &cfg, &closed, 3000).unwrap();
            let side = rec.position[0].signum();
            assert!(rec.position.iter().all(|x| x.signum() == side || *x == 0.0));
            assert!(rec.crossing_steps.is_empty());
            assert_eq!(rec.wall_hits as u32, rec.l[3000]);
        }
    }

    #[test]
    fn mirror_identity_with_shared_stream() {
        let cfg = LorentzConfig::reference();
        for i in 0..10 {
            let per = run_trajectory(&mut stream(8, i), &cfg, &HoleSchedule::no_wall(), 3000).unwrap();
            let wall = run_trajectory(&mut stream(8, i), &cfg, &shrinking(0.15), 3000).unwrap();
            assert_eq!(per.l, wall.l);
            for (a, b) in per.position.iter().zip(&wall.position) {
                assert_eq!(a.abs(), b.abs());
            }
        }
    }

    #[test]
    fn kappa_telescopes() {
        let cfg = LorentzConfig::reference();
        let rec = run_trajectory(&mut stream(9, 0), &cfg, &shrinking(0.1), 5000).unwrap();
        let total: f64 = rec.kappa.iter().sum();
        assert!((total - (rec.position[5000] - rec.position[0])).abs() < 1e-9);
        assert_eq!(rec.s[5000], rec.kappa.iter().fold(0.0, |a, k| a + k));
    }

    #[test]
    fn deterministic_records() {
        let cfg = LorentzConfig::reference();
        let a = run_trajectory(&mut stream(10, 2), &cfg, &shrinking(0.1), 1000).unwrap();
        let b = run_trajectory(&mut stream(10, 2), &cfg, &shrinking(0.1), 1000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counted_wall_hits_add_steps_at_the_wall() {
        let mut cfg = LorentzConfig::reference();
        cfg.count_wall_hits = true;
        let closed = HoleSchedule::new(
            Regime::Shrinking,
            AlphaSchedule::Const { alpha: 0.0 },
            CrossingMode::Geometric,
        );
        let mut total = 0;
        for i in 0..10 {
            let rec = run_trajectory(&mut stream(12, i), &cfg, &closed, 2000).unwrap();
            assert_eq!(rec.steps(), 2000);
            let at_wall = rec.position[1..].iter().filter(|x| **x == 0.0).count();
            assert_eq!(at_wall, rec.wall_hits);
            total += rec.wall_hits;
        }
        assert!(total > 0);
    }

    #[test]
    fn scaled_paths() {
        let mut rec = TrajectoryRecord::start(4, 0.0, None);
        for _ in 0..4 {
            rec.push(0.0, 0, 0.0);
        }
        let p = scaled_path(&rec, 4);
        assert!(p.values().iter().all(|v| *v == 0.0));
        let lt = local_time_path(&rec, 4);
        assert!(lt.values().iter().all(|v| *v == 0.0));

        let d = 0.7;
        let mut rec = TrajectoryRecord::start(4, 0.0, None);
        for k in 1..=4 {
            rec.push(d * k as f64, k as u32, 0.0);
        }
        let p = scaled_path(&rec, 4);
        for t in [0.0, 0.3, 0.5, 0.8, 1.0] {
            assert!((p.eval(t) - d * t * 2.0).abs() < 1e-12);
        }
        assert_eq!(p.eval(0.5), rec.position[2] / 2.0);
        let lt = local_time_path(&rec, 4);
        assert_eq!(lt.eval(0.6), 1.0);
    }
}
