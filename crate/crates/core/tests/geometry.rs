use std::f64::consts::PI;

use lorentz_core::geometry::time_reversed;
use lorentz_core::rng::stream;
use lorentz_core::sim::{sample_initial_state, REFERENCE_MAX_FREE_PATH};
use lorentz_core::stats::ks_two_sample;
use lorentz_core::{billiard_map, HitObject, LorentzConfig, ParticleState, ScattererLattice, Vec2};
use rand::Rng;

/// Free flight from `q` along `v` by brute force over a block of cells.
fn brute_free_flight(lat: &ScattererLattice, q: Vec2, v: Vec2) -> f64 {
    let mut best = f64::INFINITY;
    let (ci, cj) = (q.x.floor() as i64, q.y.floor() as i64);
    for i in ci - 3..=ci + 3 {
        for j in cj - 3..=cj + 3 {
            for d in lat.disks() {
                let cx = d.center.x + i as f64 - q.x;
                let cy = d.center.y + j as f64 - q.y;
                // |t v - c|^2 = r^2
                let b = v.x * cx + v.y * cy;
                let disc = b * b - (cx * cx + cy * cy - d.radius * d.radius);
                if disc <= 0.0 {
                    continue;
                }
                let t = b - disc.sqrt();
                if t > 1e-9 && t < best {
                    best = t;
                }
            }
        }
    }
    best
}

fn random_boundary_state<R: Rng>(rng: &mut R, lat: &ScattererLattice) -> (Vec2, Vec2) {
    let index = rng.random_range(0..lat.disks().len());
    let d = lat.disks()[index];
    let n = Vec2::from_angle(rng.random_range(0.0..2.0 * PI));
    let phi = rng.random_range(-PI / 2.0..PI / 2.0);
    (d.center + n * d.radius, n.rotated(phi))
}

#[test]
fn reference_bound_is_reproduced_by_the_sweep() {
    let bound = ScattererLattice::reference().validate_finite_horizon().unwrap();
    assert!((bound - REFERENCE_MAX_FREE_PATH).abs() < 1e-9, "{bound}");
}

#[test]
fn bound_dominates_brute_force_flights() {
    let lat = ScattererLattice::reference();
    let raw = REFERENCE_MAX_FREE_PATH / 1.05;
    let mut rng = stream(1, 0);
    let mut longest: f64 = 0.0;
    for _ in 0..200_000 {
        let (q, v) = random_boundary_state(&mut rng, &lat);
        longest = longest.max(brute_free_flight(&lat, q, v));
    }
    assert!(longest <= raw + 1e-6, "{longest} > {raw}");
    // the sweep is not wildly conservative either
    assert!(longest > 0.97 * raw, "{longest} vs {raw}");
}

#[test]
fn collisions_match_brute_force() {
    let lat = ScattererLattice::reference();
    let mut rng = stream(2, 0);
    for _ in 0..20_000 {
        let (q, v) = random_boundary_state(&mut rng, &lat);
        let t = brute_free_flight(&lat, q, v);
        let (t_hit, _) = lat.cast_ray(q, v, 2.0).unwrap();
        assert!((t - t_hit).abs() < 1e-10, "{t} vs {t_hit}");
    }
}

#[test]
fn speed_is_conserved_over_a_million_steps() {
    let cfg = LorentzConfig::reference();
    let mut state = sample_initial_state(&mut stream(3, 0), &cfg);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        state = billiard_map(&state, &cfg.lattice, cfg.max_free_path).unwrap().0;
        worst = worst.max((state.v.norm() - 1.0).abs());
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn every_step_of_a_long_orbit_reverses() {
    let cfg = LorentzConfig::reference();
    let mut state = sample_initial_state(&mut stream(4, 0), &cfg);
    for _ in 0..1000 {
        let (next, _) = billiard_map(&state, &cfg.lattice, cfg.max_free_path).unwrap();
        let (back, _) = billiard_map(
            &time_reversed(&next, &cfg.lattice),
            &cfg.lattice,
            cfg.max_free_path,
        )
        .unwrap();
        assert!((back.q - state.q).norm() < 1e-8);
        state = next;
    }
}

#[test]
fn short_segments_retrace_their_hit_points() {
    // rounding grows by the expansion rate at each collision, so whole
    // segments are checked over a short window only
    let cfg = LorentzConfig::reference();
    let mut rng = stream(5, 0);
    for _ in 0..100 {
        let mut state = sample_initial_state(&mut rng, &cfg);
        let mut points = vec![state.q];
        for _ in 0..6 {
            state = billiard_map(&state, &cfg.lattice, cfg.max_free_path).unwrap().0;
            points.push(state.q);
        }
        let mut back = time_reversed(&state, &cfg.lattice);
        for expected in points.iter().rev().skip(1) {
            back = billiard_map(&back, &cfg.lattice, cfg.max_free_path).unwrap().0;
            assert!((back.q - *expected).norm() < 1e-8);
        }
    }
}

/// Arclength along the boundary of the fundamental cell and the angle of
/// the velocity to the normal.
fn section_coordinates(lat: &ScattererLattice, s: &ParticleState) -> (f64, f64) {
    let Some(HitObject::Disk { index, cell }) = s.on else {
        panic!("expected a disk point")
    };
    let offset: f64 = lat.disks()[..index].iter().map(|d| 2.0 * PI * d.radius).sum();
    let r = lat.disks()[index].radius;
    let normal = (s.q - lat.disk_center(index, cell)).normalized();
    let theta = normal.angle().rem_euclid(2.0 * PI);
    let phi = normal.x * s.v.y - normal.y * s.v.x;
    (offset + r * theta, phi.clamp(-1.0, 1.0).asin())
}

#[test]
fn one_step_preserves_the_section_measure() {
    let cfg = LorentzConfig::reference();
    let mut rng = stream(6, 0);
    let m = 100_000;
    let (mut s0, mut p0, mut s1, mut p1) = (vec![], vec![], vec![], vec![]);
    for _ in 0..m {
        let a = sample_initial_state(&mut rng, &cfg);
        let (s, p) = section_coordinates(&cfg.lattice, &a);
        s0.push(s);
        p0.push(p);
        // a fresh independent start for the image side
        let b = sample_initial_state(&mut rng, &cfg);
        let img = billiard_map(&b, &cfg.lattice, cfg.max_free_path).unwrap().0;
        let (s, p) = section_coordinates(&cfg.lattice, &img);
        s1.push(s);
        p1.push(p);
    }
    let ks_s = ks_two_sample("arclength", &s0, &s1, 0.02).unwrap();
    let ks_p = ks_two_sample("angle", &p0, &p1, 0.02).unwrap();
    assert!(ks_s.pass, "{ks_s:?}");
    assert!(ks_p.pass, "{ks_p:?}");
}
