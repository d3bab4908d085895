use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("no collision within certified free path {bound} (searched to t = {searched})")]
    NoCollisionWithinHorizon { bound: f64, searched: f64 },

    #[error("infinite horizon: open corridor in direction {direction} rad")]
    InfiniteHorizon { direction: f64 },

    #[error("invalid wall: {0}")]
    InvalidWall(String),

    #[error("hole of length {alpha} does not fit in the shortest wall component ({min_component})")]
    HoleTooLarge { alpha: f64, min_component: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("wall chatter: {events} uncounted wall events between two counted collisions")]
    StepBudgetExceeded { events: usize },

    #[error("point process with intensity c/sqrt(t) dL needs a truncation time t0 > 0")]
    TruncationRequired,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Le Cam bound supports at most {max} Bernoulli terms, got {got}")]
    SizeExceeded { got: usize, max: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { got: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
