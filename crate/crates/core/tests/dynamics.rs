use lorentz_core::rng::stream;
use lorentz_core::sim::{run_ensemble, wall_visit, WallDynamics};
use lorentz_core::{
    run_trajectory, AlphaSchedule, CrossingMode, HoleSchedule, LorentzConfig, Regime, TrajectoryRecord, Vec2,
    WallConfig,
};

fn closed() -> HoleSchedule {
    HoleSchedule::new(
        Regime::Shrinking,
        AlphaSchedule::Const { alpha: 0.0 },
        CrossingMode::Geometric,
    )
}

fn shrinking() -> HoleSchedule {
    HoleSchedule::new(
        Regime::Shrinking,
        AlphaSchedule::InvSqrt { c: 0.15 },
        CrossingMode::Geometric,
    )
}

/// Recounts wall visits from the hit points of a wall-free run.
fn rescan_visits(rec: &TrajectoryRecord, wall: &WallConfig) -> Vec<u32> {
    let mut l = vec![0];
    for w in rec.hit_points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut hit = false;
        if (a.x < 0.0 && b.x > 0.0) || (a.x > 0.0 && b.x < 0.0) {
            let y = a.y + (b.y - a.y) * (0.0 - a.x) / (b.x - a.x);
            let y = y - y.floor();
            hit = wall.components().iter().any(|&(lo, hi)| lo < y && y < hi);
        }
        l.push(l.last().unwrap() + u32::from(hit));
    }
    l
}

#[test]
fn visit_counts_match_a_rescan() {
    let cfg = LorentzConfig::reference();
    for i in 0..20 {
        let rec = run_trajectory(&mut stream(1, i), &cfg, &HoleSchedule::no_wall(), 5000).unwrap();
        assert_eq!(rec.l, rescan_visits(&rec, &cfg.wall));
    }
}

#[test]
fn flights_outside_the_components_are_not_visits() {
    let mut cfg = LorentzConfig::reference();
    // only part of the free segment {0} x (0.4, 0.6) is declared wall
    cfg.wall = WallConfig::new(vec![(0.45, 0.5)]).unwrap();
    let mut skipped = 0;
    for i in 0..20 {
        let rec = run_trajectory(&mut stream(2, i), &cfg, &HoleSchedule::no_wall(), 5000).unwrap();
        assert_eq!(rec.l, rescan_visits(&rec, &cfg.wall));
        let full = rescan_visits(&rec, &LorentzConfig::reference().wall);
        skipped += full[5000] - rec.l[5000];
    }
    assert!(skipped > 0);
}

#[test]
fn direct_reflection_matches_the_mirror_image() {
    let mirror = LorentzConfig::reference();
    let mut direct = LorentzConfig::reference();
    direct.dynamics = WallDynamics::Direct;
    let mut compared = 0;
    for i in 0..400 {
        let a = run_trajectory(&mut stream(3, i), &mirror, &shrinking(), 200).unwrap();
        let b = run_trajectory(&mut stream(3, i), &direct, &shrinking(), 200).unwrap();
        if a.wall_hits == 0 {
            continue;
        }
        // agreement up to the first few steps after the first reflection,
        // before rounding differences are amplified
        let first = (1..=200).find(|&k| a.l[k] > 0).unwrap();
        let horizon = (first + 3).min(200);
        for k in 0..=horizon {
            assert!(
                (a.position[k].abs() - b.position[k].abs()).abs() < 1e-8,
                "sample {i} step {k}"
            );
        }
        assert_eq!(a.l[..=horizon], b.l[..=horizon]);
        compared += 1;
    }
    assert!(compared > 10);
}

#[test]
fn wall_reflections_keep_speed_and_vertical_velocity() {
    let mut cfg = LorentzConfig::reference();
    cfg.dynamics = WallDynamics::Direct;
    cfg.count_wall_hits = true;
    let mut seen = 0;
    for i in 0..50 {
        let rec = run_trajectory(&mut stream(4, i), &cfg, &closed(), 2000).unwrap();
        for j in 1..rec.hit_points.len() - 1 {
            if rec.position[j] != 0.0 {
                continue;
            }
            let (a, p, b) = (rec.hit_points[j - 1], rec.hit_points[j], rec.hit_points[j + 1]);
            let inc = (p - a).normalized();
            let out = (b - p).normalized();
            assert!((inc.x + out.x).abs() < 1e-9 && (inc.y - out.y).abs() < 1e-9);
            assert!((out.norm() - 1.0).abs() < 1e-12);
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn mirror_coupling_is_exact() {
    let cfg = LorentzConfig::reference();
    for i in 0..50 {
        let per = run_trajectory(&mut stream(5, i), &cfg, &HoleSchedule::no_wall(), 4000).unwrap();
        for sched in [shrinking(), closed()] {
            let wall = run_trajectory(&mut stream(5, i), &cfg, &sched, 4000).unwrap();
            assert!(per
                .position
                .iter()
                .zip(&wall.position)
                .all(|(a, b)| a.abs() == b.abs()));
            assert_eq!(per.l, wall.l);
        }
    }
}

#[test]
fn crossings_happen_only_at_visits() {
    let cfg = LorentzConfig::reference();
    let sched = HoleSchedule::new(
        Regime::DoubleArray,
        AlphaSchedule::Const { alpha: 0.15 },
        CrossingMode::Trapdoor,
    );
    for i in 0..20 {
        let rec = run_trajectory(&mut stream(6, i), &cfg, &sched, 3000).unwrap();
        for &k in &rec.crossing_steps {
            assert_eq!(rec.l[k], rec.l[k - 1] + 1);
        }
    }
}

#[test]
fn ensembles_are_reproducible_and_prefix_stable() {
    let cfg = LorentzConfig::reference();
    let f = |_: usize, r: TrajectoryRecord| (r.s[1000], r.l[1000]);
    let a = run_ensemble(&cfg, &shrinking(), 1000, 16, 9, f).unwrap();
    let b = run_ensemble(&cfg, &shrinking(), 1000, 16, 9, f).unwrap();
    let c = run_ensemble(&cfg, &shrinking(), 1000, 24, 9, f).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[..], c[..16]);
}

#[test]
fn wall_visit_needs_a_strict_crossing() {
    let cfg = LorentzConfig::reference();
    assert_eq!(
        wall_visit(&cfg, Vec2::new(-0.1, 0.5), Vec2::new(0.1, 0.5)),
        Some(0.5)
    );
    assert_eq!(
        wall_visit(&cfg, Vec2::new(-0.1, 1.5), Vec2::new(0.1, 1.5)),
        Some(0.5)
    );
    assert_eq!(wall_visit(&cfg, Vec2::new(0.0, 0.5), Vec2::new(0.1, 0.5)), None);
    assert_eq!(wall_visit(&cfg, Vec2::new(-0.1, 0.6), Vec2::new(0.1, 0.6)), None);
}
