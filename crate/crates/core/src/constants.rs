//! Numerical tolerances and calibrated constants, kept in one place.

/// Ray/disk discriminants below this are treated as misses (grazing rays continue).
pub const TANGENT_DISCRIMINANT_TOL: f64 = 1e-12;

/// Roots closer than this to the ray origin are ignored, so a particle
/// leaving a disk does not re-hit it at t = 0.
pub const SELF_HIT_EPS: f64 = 1e-10;

/// Allowed deviation of |v| from one.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Tolerance when matching mirrored disks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Length of one search chunk when marching a ray through the lattice.
pub const RAY_CHUNK: f64 = 1.0;

/// Probe rays longer than this during horizon validation count as open corridors.
pub const HORIZON_PROBE_LIMIT: f64 = 64.0;

/// Default direction x offset resolution of the horizon sweep.
pub const HORIZON_DIRECTIONS: usize = 2048;
pub const HORIZON_OFFSETS: usize = 512;
/// Local refinement rounds around the longest probes.
pub const HORIZON_REFINE_ROUNDS: usize = 4;
pub const HORIZON_REFINE_CANDIDATES: usize = 24;
/// Multiplicative safety margin on the swept maximum.
pub const HORIZON_SAFETY: f64 = 1.05;

/// Uncounted wall events tolerated between two counted collisions.
pub const MAX_WALL_CHATTER: usize = 1000;

/// Largest Bernoulli family accepted by the Le Cam computation.
pub const LE_CAM_MAX_TERMS: usize = 10_000;

/// Above this mean the Poisson pmf is evaluated in log space only.
pub const POISSON_LOG_SPACE_LAMBDA: f64 = 700.0;

/// Zero-visit count to local time normalizer `r` for the lattice backbone:
/// local time at k/N is (#zero visits up to k) / (r * sigma * sqrt(N)).
/// Calibrated against the occupation-density local time of Gaussian-increment
/// paths (see `tests/calibration.rs`).
pub const LATTICE_LOCAL_TIME_NORMALIZER: f64 = 1.0;

/// E[L_1] for standard Brownian motion (occupation-density normalization),
/// sqrt(2 / pi). For parameter sigma the mean scales as 1 / sigma.
pub const EXPECTED_LOCAL_TIME_AT_ONE: f64 = 0.797_884_560_802_865_4;

/// Minimum sample size for the KS tests and estimators.
pub const MIN_SAMPLES: usize = 50;
