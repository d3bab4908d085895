//! The wall at `x = 0`, its holes and the crossing decision.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScattererLattice;

/// Wall components `[J_l, J_r]` on the vertical line `x = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallConfig {
    components: Vec<(f64, f64)>,
    c1: f64,
}

impl WallConfig {
    pub fn new(mut components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidWall("no components".into()));
        }
        components.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(lo, hi) in &components {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                return Err(Error::InvalidWall(format!("bad component [{lo}, {hi}]")));
            }
        }
        if components.windows(2).any(|w| w[0].1 >= w[1].0) {
            return Err(Error::InvalidWall("components overlap or touch".into()));
        }
        let c1 = components.iter().map(|(lo, hi)| hi - lo).sum();
        Ok(Self { components, c1 })
    }

    /// The wall cut out of `{x = 0}` by the lattice.
    pub fn from_lattice(lattice: &ScattererLattice) -> Result<Self> {
        Self::new(lattice.wall_components()?)
    }

    /// Checks that these components are exactly those of `lattice`.
    pub fn validate_against(&self, lattice: &ScattererLattice) -> Result<()> {
        let derived = lattice.wall_components()?;
        let same = derived.len() == self.components.len()
            && derived
                .iter()
                .zip(&self.components)
                .all(|(a, b)| (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        if same {
            Ok(())
        } else {
            Err(Error::InvalidWall(format!(
                "components {:?} differ from the lattice's {:?}",
                self.components, derived
            )))
        }
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Total wall length.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn min_component_length(&self) -> f64 {
        self.components
            .iter()
            .map(|(lo, hi)| hi - lo)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the component containing `y` (closed intervals).
    pub fn component_of(&self, y: f64) -> Option<usize> {
        self.components.iter().position(|&(lo, hi)| lo <= y && y <= hi)
    }

    /// True iff `y` lies strictly inside some component.
    pub fn in_open_component(&self, y: f64) -> bool {
        self.components.iter().any(|&(lo, hi)| lo < y && y < hi)
    }

    /// Maps a point `u * c1` of the concatenated wall back to a height.
    fn height_at(&self, mut offset: f64) -> (usize, f64) {
        for (i, &(lo, hi)) in self.components.iter().enumerate() {
            let len = hi - lo;
            if offset < len || i + 1 == self.components.len() {
                return (i, (lo + offset).min(hi));
            }
            offset -= len;
        }
        unreachable!("wall has at least one component")
    }
}

/// An open hole: one interval, or two when it wraps inside its component.
#[derive(Clone, Debug, PartialEq)]
pub struct HoleInterval {
    pub pieces: Vec<(f64, f64)>,
    pub total_length: f64,
}

impl HoleInterval {
    /// Hole of length `alpha` starting at `xi`, wrapping to the bottom of
    /// `xi`'s component when it would run past the top.
    pub fn starting_at(wall: &WallConfig, xi: f64, alpha: f64) -> Result<Self> {
        check_alpha(wall, alpha)?;
        let comp = wall
            .component_of(xi)
            .ok_or_else(|| Error::Domain(format!("hole start {xi} is not on the wall")))?;
        let (lo, hi) = wall.components[comp];
        let room = hi - xi;
        let pieces = if room > alpha {
            vec![(xi, xi + alpha)]
        } else {
            vec![(xi, hi), (lo, lo + alpha - room)]
        };
        Ok(Self {
            pieces,
            total_length: alpha,
        })
    }

    /// Endpoints are excluded.
    pub fn contains(&self, y: f64) -> bool {
        self.pieces.iter().any(|&(lo, hi)| lo < y && y < hi)
    }
}

fn check_alpha(wall: &WallConfig, alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!("hole size {alpha} is negative")));
    }
    let min_component = wall.min_component_length();
    if alpha >= min_component {
        return Err(Error::HoleTooLarge { alpha, min_component });
    }
    Ok(())
}

/// Samples a hole of length `alpha` with start point uniform on the wall.
/// Consumes exactly one `f64` from `rng`.
pub fn sample_hole<R: Rng + ?Sized>(rng: &mut R, wall: &WallConfig, alpha: f64) -> Result<HoleInterval> {
    check_alpha(wall, alpha)?;
    let u: f64 = rng.random();
    let (_, xi) = wall.height_at(u * wall.c1);
    HoleInterval::starting_at(wall, xi, alpha)
}

pub fn hole_contains(hole: &HoleInterval, y: f64) -> bool {
    hole.contains(y)
}

/// Probability that a hole of size `alpha` covers a fixed wall height.
pub fn crossing_probability(wall: &WallConfig, alpha: f64) -> f64 {
    alpha / wall.c1
}

/// Hole-size families selectable by name in experiment configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `c / sqrt(n)`.
    InvSqrt { c: f64 },
    /// Constant `alpha`.
    Const { alpha: f64 },
    /// `c * n^(-beta)`.
    Power { c: f64, beta: f64 },
}

impl AlphaSchedule {
    pub fn name(&self) -> &'static str {
        match self {
            AlphaSchedule::InvSqrt { .. } => "inv_sqrt",
            AlphaSchedule::Const { .. } => "const",
            AlphaSchedule::Power { .. } => "power",
        }
    }

    /// Value at `n >= 1`.
    pub fn at(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            AlphaSchedule::InvSqrt { c } => c / n.sqrt(),
            AlphaSchedule::Const { alpha } => alpha,
            AlphaSchedule::Power { c, beta } => c * n.powf(-beta),
        }
    }

    fn validate_params(&self) -> Result<()> {
        let ok = match *self {
            AlphaSchedule::InvSqrt { c } => c >= 0.0 && c.is_finite(),
            AlphaSchedule::Const { alpha } => alpha >= 0.0 && alpha.is_finite(),
            AlphaSchedule::Power { c, beta } => c >= 0.0 && c.is_finite() && beta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSchedule(format!("bad parameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Hole `I_n` of size `alpha_n` at collision `n`.
    #[default]
    Shrinking,
    /// Every hole of a horizon-`n` run has size `alpha_n`.
    DoubleArray,
    /// No wall: plain periodic Lorentz process.
    NoWall,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingMode {
    /// Fresh uniformly placed hole at each wall hit.
    #[default]
    Geometric,
    /// Wall opens with probability `alpha_n / c1`.
    Trapdoor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleSchedule {
    pub regime: Regime,
    pub alpha: AlphaSchedule,
    pub crossing_mode: CrossingMode,
}

impl HoleSchedule {
    pub fn new(regime: Regime, alpha: AlphaSchedule, crossing_mode: CrossingMode) -> Self {
        Self {
            regime,
            alpha,
            crossing_mode,
        }
    }

    pub fn no_wall() -> Self {
        Self::new(
            Regime::NoWall,
            AlphaSchedule::Const { alpha: 0.0 },
            CrossingMode::Geometric,
        )
    }

    /// Hole size at collision `n` of a run with `horizon` counted steps.
    pub fn hole_size(&self, n: usize, horizon: usize) -> f64 {
        match self.regime {
            Regime::Shrinking => self.alpha.at(n),
            Regime::DoubleArray => self.alpha.at(horizon),
            Regime::NoWall => f64::NAN,
        }
    }

    /// Rejects schedules whose holes would not fit the wall at some
    /// collision index `1..=max_index` of a run of length `horizon`.
    pub fn validate(&self, wall: &WallConfig, horizon: usize, max_index: usize) -> Result<()> {
        self.alpha.validate_params()?;
        if self.regime == Regime::NoWall {
            return Ok(());
        }
        let min_component = wall.min_component_length();
        let worst = match self.regime {
            Regime::DoubleArray => self.alpha.at(horizon),
            _ => (1..=max_index.max(1))
                .map(|n| self.alpha.at(n))
                .fold(0.0, f64::max),
        };
        if worst >= min_component {
            return Err(Error::HoleTooLarge {
                alpha: worst,
                min_component,
            });
        }
        Ok(())
    }
}

/// Whether the particle hitting the wall at `hit_height` at collision `n`
/// passes. Both modes consume exactly one `f64` from `rng`.
pub fn decide_crossing<R: Rng + ?Sized>(
    rng: &mut R,
    schedule: &HoleSchedule,
    wall: &WallConfig,
    n: usize,
    horizon: usize,
    hit_height: f64,
) -> Result<bool> {
    if n == 0 {
        return Err(Error::Domain("collision index starts at 1".into()));
    }
    if schedule.regime == Regime::NoWall {
        return Ok(true);
    }
    let alpha = schedule.hole_size(n, horizon);
    match schedule.crossing_mode {
        CrossingMode::Geometric => Ok(sample_hole(rng, wall, alpha)?.contains(hit_height)),
        CrossingMode::Trapdoor => {
            check_alpha(wall, alpha)?;
            let u: f64 = rng.random();
            Ok(u < crossing_probability(wall, alpha))
        }
    }
}
