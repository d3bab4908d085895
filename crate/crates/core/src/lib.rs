//! Lorentz process with a wall carrying a shrinking hole, its random-walk
//! analogue, and samplers for the quasi-reflected Brownian limits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod limit;
pub mod path;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod walk;
pub mod wall;

pub use error::{Error, Result};
pub use geometry::{
    billiard_map, next_collision, reflect, BoundaryMode, CollisionEvent, Disk, HitObject, HorizonSweep,
    ParticleState, ScattererLattice, Vec2,
};
pub use limit::{
    assemble_qrbm, bridge_local_time_tail, gaussian_marginal_cdf, sample_big_qrbm, sample_bm_with_local_time,
    sample_point_process, sample_qrbm, BrownianPathWithLocalTime, Intensity, PointProcess,
};
pub use path::{Interpolation, PathFunction};
pub use sim::{run_ensemble, run_trajectory, LorentzConfig, TrajectoryRecord, WallDynamics};
pub use stats::{ks_one_sample, ks_two_sample, Ecdf, TestReport};
pub use walk::{chain_plus_probability, le_cam_bound, run_walk, WalkConfig, WalkRegime};
pub use wall::{AlphaSchedule, CrossingMode, HoleInterval, HoleSchedule, Regime, WallConfig};
