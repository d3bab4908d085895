//! Disk scatterers in a horizontal strip, free flights and specular reflection.
//!
//! The fundamental cell is `[0,1) x [0,1)`. Scatterers are repeated with
//! period one horizontally; in [`BoundaryMode::VerticalTorus`] they are also
//! repeated vertically and the strip floor and ceiling disappear.
//!
//! Positions are kept in absolute (unwrapped) coordinates, so the horizontal
//! coordinate of a hit point is directly the particle's displacement from
//! the wall at `x = 0`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::constants::{
    HORIZON_DIRECTIONS, HORIZON_OFFSETS, HORIZON_PROBE_LIMIT, HORIZON_REFINE_CANDIDATES,
    HORIZON_REFINE_ROUNDS, HORIZON_SAFETY, RAY_CHUNK, SELF_HIT_EPS, SYMMETRY_TOL, TANGENT_DISCRIMINANT_TOL,
    UNIT_NORM_TOL,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Counter-clockwise rotation by `theta`.
    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Self {
            center: Vec2::new(x, y),
            radius,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Horizontal strip `R x [0,1]` with specular floor and ceiling.
    ReflectingStrip,
    /// Vertical direction is periodic; scatterers form a Z^2-periodic array.
    #[default]
    VerticalTorus,
}

/// What a free flight ends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitObject {
    /// Disk `index` of the fundamental cell translated by `cell`.
    Disk {
        index: usize,
        cell: (i64, i64),
    },
    StripFloor,
    StripCeiling,
    Wall,
}

/// A point of the Poincare section: position on the boundary and the
/// post-collisional unit velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleState {
    pub q: Vec2,
    pub v: Vec2,
    /// Horizontal copy of the fundamental cell containing `q`.
    pub cell_index: i64,
    /// Boundary piece `q` lies on, if any.
    pub on: Option<HitObject>,
}

impl ParticleState {
    pub fn new(q: Vec2, v: Vec2, on: Option<HitObject>) -> Self {
        Self {
            q,
            v,
            cell_index: q.x.floor() as i64,
            on,
        }
    }

    pub fn is_unit_speed(&self) -> bool {
        (self.v.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionEvent {
    pub flight_time: f64,
    pub hit_point: Vec2,
    pub hit_object: HitObject,
    /// Horizontal displacement of the flight.
    pub kappa: f64,
}

/// Specular reflection of `v` off a boundary with unit normal `n`.
pub fn reflect(v: Vec2, n: Vec2) -> Vec2 {
    v - n * (2.0 * v.dot(n))
}

/// Resolution of the finite-horizon sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonSweep {
    pub directions: usize,
    pub offsets: usize,
    pub refine_rounds: usize,
}

impl Default for HorizonSweep {
    fn default() -> Self {
        Self {
            directions: HORIZON_DIRECTIONS,
            offsets: HORIZON_OFFSETS,
            refine_rounds: HORIZON_REFINE_ROUNDS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScattererLattice {
    disks: Vec<Disk>,
    boundary_mode: BoundaryMode,
    #[serde(skip)]
    max_radius: f64,
}

impl ScattererLattice {
    /// Builds a lattice after checking radii, placement and disjointness of
    /// the periodic extension.
    pub fn new(disks: Vec<Disk>, boundary_mode: BoundaryMode) -> Result<Self> {
        for (i, d) in disks.iter().enumerate() {
            if !(d.radius > 0.0 && d.radius.is_finite()) {
                return Err(Error::InvalidLattice(format!(
                    "disk {i} has non-positive radius {}",
                    d.radius
                )));
            }
            let c = d.center;
            if !(0.0..1.0).contains(&c.x) || !(0.0..1.0).contains(&c.y) {
                return Err(Error::InvalidLattice(format!(
                    "disk {i} center ({}, {}) outside the unit cell",
                    c.x, c.y
                )));
            }
            if boundary_mode == BoundaryMode::ReflectingStrip
                && (c.y - d.radius <= 0.0 || c.y + d.radius >= 1.0)
            {
                return Err(Error::InvalidLattice(format!(
                    "disk {i} touches the strip boundary"
                )));
            }
        }
        let vertical: &[i64] = match boundary_mode {
            BoundaryMode::ReflectingStrip => &[0],
            BoundaryMode::VerticalTorus => &[-2, -1, 0, 1, 2],
        };
        for (i, a) in disks.iter().enumerate() {
            for (j, b) in disks.iter().enumerate().skip(i) {
                for dx in -2..=2i64 {
                    for &dy in vertical {
                        if i == j && dx == 0 && dy == 0 {
                            continue;
                        }
                        let shifted = b.center + Vec2::new(dx as f64, dy as f64);
                        if (shifted - a.center).norm() <= a.radius + b.radius {
                            return Err(Error::InvalidLattice(format!(
                                "disks {i} and {j} overlap in the periodic extension"
                            )));
                        }
                    }
                }
            }
        }
        let max_radius = disks.iter().map(|d| d.radius).fold(0.0, f64::max);
        Ok(Self {
            disks,
            boundary_mode,
            max_radius,
        })
    }

    /// The shipped configuration: a Z^2-periodic array with a large disk at
    /// the cell corner and a small one at the centre. Mirror symmetric about
    /// `x = 0`, finite horizon, a single wall component `[0.4, 0.6]`.
    pub fn reference() -> Self {
        Self::new(
            vec![Disk::new(0.0, 0.0, 0.4), Disk::new(0.5, 0.5, 0.2)],
            BoundaryMode::VerticalTorus,
        )
        .expect("reference lattice is valid")
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.boundary_mode
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    /// Re-derives cached fields after deserialization and re-validates.
    pub fn revalidated(self) -> Result<Self> {
        Self::new(self.disks, self.boundary_mode)
    }

    /// Centre of disk `index` translated by `cell`.
    pub fn disk_center(&self, index: usize, cell: (i64, i64)) -> Vec2 {
        self.disks[index].center + Vec2::new(cell.0 as f64, cell.1 as f64)
    }

    /// Unit normal at `point` on `object`, pointing into the billiard domain.
    pub fn inward_normal(&self, object: HitObject, point: Vec2) -> Vec2 {
        match object {
            HitObject::Disk { index, cell } => (point - self.disk_center(index, cell)).normalized(),
            HitObject::StripFloor => Vec2::new(0.0, 1.0),
            HitObject::StripCeiling => Vec2::new(0.0, -1.0),
            HitObject::Wall => {
                if point.x >= 0.0 {
                    Vec2::new(1.0, 0.0)
                } else {
                    Vec2::new(-1.0, 0.0)
                }
            }
        }
    }

    /// True iff the disk set is invariant under `x -> -x` (mod 1).
    pub fn validate_symmetry(&self) -> bool {
        let periodic_gap = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(1.0);
            d.min(1.0 - d)
        };
        self.disks.iter().all(|d| {
            let mx = (-d.center.x).rem_euclid(1.0);
            self.disks.iter().any(|e| {
                periodic_gap(e.center.x, mx) <= SYMMETRY_TOL
                    && (e.center.y - d.center.y).abs() <= SYMMETRY_TOL
                    && (e.radius - d.radius).abs() <= SYMMETRY_TOL
            })
        })
    }

    /// Earliest boundary hit of the ray `q + t v`, `t > 0`, searching no
    /// further than `limit`. Returns `None` when nothing is hit in range.
    pub fn cast_ray(&self, q: Vec2, v: Vec2, limit: f64) -> Option<(f64, HitObject)> {
        let mut best: Option<(f64, HitObject)> = None;
        if self.boundary_mode == BoundaryMode::ReflectingStrip {
            if v.y < 0.0 {
                let t = -q.y / v.y;
                if t > SELF_HIT_EPS {
                    best = Some((t, HitObject::StripFloor));
                }
            } else if v.y > 0.0 {
                let t = (1.0 - q.y) / v.y;
                if t > SELF_HIT_EPS {
                    best = Some((t, HitObject::StripCeiling));
                }
            }
        }
        if self.disks.is_empty() {
            return best.filter(|&(t, _)| t <= limit);
        }
        let pad = self.max_radius;
        let mut t_lo = 0.0;
        loop {
            let t_hi = t_lo + RAY_CHUNK;
            let a = q + v * t_lo;
            let b = q + v * t_hi;
            let x_range = (a.x.min(b.x) - pad, a.x.max(b.x) + pad);
            let (j_lo, j_hi) = match self.boundary_mode {
                BoundaryMode::ReflectingStrip => (0, 0),
                BoundaryMode::VerticalTorus => {
                    let y_lo = a.y.min(b.y) - pad;
                    let y_hi = a.y.max(b.y) + pad;
                    (y_lo.floor() as i64 - 1, y_hi.floor() as i64)
                }
            };
            let (i_lo, i_hi) = (x_range.0.floor() as i64 - 1, x_range.1.floor() as i64);
            for j in j_lo..=j_hi {
                for i in i_lo..=i_hi {
                    let shift = Vec2::new(i as f64, j as f64);
                    for (index, disk) in self.disks.iter().enumerate() {
                        let c = disk.center + shift;
                        if c.x < x_range.0 - disk.radius + pad || c.x > x_range.1 + disk.radius - pad {
                            continue;
                        }
                        if let Some(t) = ray_disk(q, v, c, disk.radius) {
                            if best.is_none_or(|(bt, _)| t < bt) {
                                best = Some((t, HitObject::Disk { index, cell: (i, j) }));
                            }
                        }
                    }
                }
            }
            if let Some((t, _)) = best {
                if t <= t_hi {
                    return best.filter(|&(t, _)| t <= limit);
                }
            }
            if t_hi >= limit {
                return None;
            }
            t_lo = t_hi;
        }
    }

    /// Certified upper bound on the free-flight length.
    ///
    /// Probes rays from a grid of boundary points and outgoing angles, refines
    /// around the longest probes and inflates the maximum by a safety factor.
    /// Any probe that runs past the probe limit is reported as an open
    /// corridor. This is a numerical certificate, not a proof.
    pub fn validate_finite_horizon(&self) -> Result<f64> {
        self.validate_finite_horizon_with(HorizonSweep::default())
    }

    pub fn validate_finite_horizon_with(&self, sweep: HorizonSweep) -> Result<f64> {
        if self.disks.is_empty() {
            return Err(Error::InfiniteHorizon { direction: 0.0 });
        }
        let pieces = self.boundary_pieces();
        let m = sweep.directions.max(2);
        let k = sweep.offsets.max(2);
        // (length, piece, offset in [0,1), angle in (-pi/2, pi/2))
        let mut probes: Vec<(f64, usize, f64, f64)> = Vec::with_capacity(pieces.len() * m * k);
        for (p, piece) in pieces.iter().enumerate() {
            for a in 0..k {
                let s = (a as f64 + 0.5) / k as f64;
                for b in 0..m {
                    let phi = -FRAC_PI_2 + PI * (b as f64 + 0.5) / m as f64;
                    let len = self.probe(piece, s, phi)?;
                    probes.push((len, p, s, phi));
                }
            }
        }
        probes.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut best = probes[0].0;
        let (mut ds, mut dphi) = (1.0 / k as f64, PI / m as f64);
        let mut candidates: Vec<_> = probes.into_iter().take(HORIZON_REFINE_CANDIDATES).collect();
        for _ in 0..sweep.refine_rounds {
            let mut next = Vec::with_capacity(candidates.len());
            for &(len, p, s, phi) in &candidates {
                let mut local = (len, p, s, phi);
                for a in -4..=4 {
                    for b in -4..=4 {
                        let s2 = (s + ds * a as f64 / 4.0).rem_euclid(1.0);
                        let phi2 = (phi + dphi * b as f64 / 4.0).clamp(-FRAC_PI_2 + 1e-9, FRAC_PI_2 - 1e-9);
                        let l = self.probe(&pieces[p], s2, phi2)?;
                        if l > local.0 {
                            local = (l, p, s2, phi2);
                        }
                    }
                }
                best = best.max(local.0);
                next.push(local);
            }
            candidates = next;
            ds /= 4.0;
            dphi /= 4.0;
        }
        Ok(best * HORIZON_SAFETY)
    }

    fn boundary_pieces(&self) -> Vec<BoundaryPiece> {
        let mut pieces: Vec<_> = (0..self.disks.len()).map(BoundaryPiece::Disk).collect();
        if self.boundary_mode == BoundaryMode::ReflectingStrip {
            pieces.push(BoundaryPiece::Floor);
            pieces.push(BoundaryPiece::Ceiling);
        }
        pieces
    }

    /// Boundary point at arclength fraction `s` of `piece`, with its inward normal.
    fn boundary_point(&self, piece: &BoundaryPiece, s: f64) -> (Vec2, Vec2, HitObject) {
        match *piece {
            BoundaryPiece::Disk(index) => {
                let d = self.disks[index];
                let n = Vec2::from_angle(2.0 * PI * s);
                (
                    d.center + n * d.radius,
                    n,
                    HitObject::Disk { index, cell: (0, 0) },
                )
            }
            BoundaryPiece::Floor => (Vec2::new(s, 0.0), Vec2::new(0.0, 1.0), HitObject::StripFloor),
            BoundaryPiece::Ceiling => (Vec2::new(s, 1.0), Vec2::new(0.0, -1.0), HitObject::StripCeiling),
        }
    }

    fn probe(&self, piece: &BoundaryPiece, s: f64, phi: f64) -> Result<f64> {
        let (q, n, _) = self.boundary_point(piece, s);
        let v = n.rotated(phi);
        match self.cast_ray(q, v, HORIZON_PROBE_LIMIT) {
            Some((t, _)) => Ok(t),
            None => Err(Error::InfiniteHorizon { direction: v.angle() }),
        }
    }

    /// Connected components of `{x = 0}` minus the scatterers, as sorted
    /// closed intervals of heights in `[0, 1]`.
    pub fn wall_components(&self) -> Result<Vec<(f64, f64)>> {
        let mut covered: Vec<(f64, f64)> = Vec::new();
        let rows: &[i64] = match self.boundary_mode {
            BoundaryMode::ReflectingStrip => &[0],
            BoundaryMode::VerticalTorus => &[-1, 0, 1],
        };
        for d in &self.disks {
            for i in -1..=1i64 {
                let cx = d.center.x + i as f64;
                if cx.abs() < d.radius {
                    let h = (d.radius * d.radius - cx * cx).sqrt();
                    for &j in rows {
                        let cy = d.center.y + j as f64;
                        covered.push((cy - h, cy + h));
                    }
                }
            }
        }
        covered.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut free = Vec::new();
        let mut cursor = 0.0;
        for (lo, hi) in covered {
            if hi <= cursor {
                continue;
            }
            if lo > cursor && cursor < 1.0 {
                free.push((cursor, lo.min(1.0)));
            }
            cursor = cursor.max(hi);
        }
        if cursor < 1.0 {
            free.push((cursor, 1.0));
        }
        if self.boundary_mode == BoundaryMode::VerticalTorus {
            let touches_seam = free.iter().any(|&(lo, hi)| lo <= 0.0 || hi >= 1.0);
            if touches_seam {
                return Err(Error::InvalidWall(
                    "a wall component crosses the periodic seam y = 0; shift the lattice vertically".into(),
                ));
            }
        }
        Ok(free)
    }
}

#[derive(Clone, Copy, Debug)]
enum BoundaryPiece {
    Disk(usize),
    Floor,
    Ceiling,
}

/// Entry time of the ray `q + t v` into the disk `(c, r)`, if it enters at
/// some `t > 0`. Grazing rays are misses.
#[inline]
fn ray_disk(q: Vec2, v: Vec2, c: Vec2, r: f64) -> Option<f64> {
    let d = q - c;
    let b = d.dot(v);
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - (d.dot(d) - r * r);
    if disc < TANGENT_DISCRIMINANT_TOL {
        return None;
    }
    let t = -b - disc.sqrt();
    (t > SELF_HIT_EPS).then_some(t)
}

/// Next collision of the free flight from `state`, searching up to
/// `max_free_path`.
pub fn next_collision(
    state: &ParticleState,
    lattice: &ScattererLattice,
    max_free_path: f64,
) -> Result<CollisionEvent> {
    match lattice.cast_ray(state.q, state.v, max_free_path) {
        Some((t, hit_object)) => {
            let hit_point = state.q + state.v * t;
            Ok(CollisionEvent {
                flight_time: t,
                hit_point,
                hit_object,
                kappa: hit_point.x - state.q.x,
            })
        }
        None => Err(Error::NoCollisionWithinHorizon {
            bound: max_free_path,
            searched: max_free_path,
        }),
    }
}

/// One step of the billiard ball map: fly to the next boundary point and
/// reflect. Returns the new section point and the horizontal increment.
pub fn billiard_map(
    state: &ParticleState,
    lattice: &ScattererLattice,
    max_free_path: f64,
) -> Result<(ParticleState, f64)> {
    let ev = next_collision(state, lattice, max_free_path)?;
    let n = lattice.inward_normal(ev.hit_object, ev.hit_point);
    // renormalized so that rounding does not accumulate in the speed
    let v = reflect(state.v, n).normalized();
    Ok((ParticleState::new(ev.hit_point, v, Some(ev.hit_object)), ev.kappa))
}

/// The time-reversed section point: same position, incoming velocity negated.
pub fn time_reversed(state: &ParticleState, lattice: &ScattererLattice) -> ParticleState {
    let v = match state.on {
        Some(obj) => -reflect(state.v, lattice.inward_normal(obj, state.q)),
        None => -state.v,
    };
    ParticleState::new(state.q, v, state.on)
}
