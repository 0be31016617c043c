use thiserror::Error;

/// Errors raised anywhere in the debonding toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("value {s} lies outside the range [{lo}, {hi}] of the monotone map")]
    Range { s: f64, lo: f64, hi: f64 },

    #[error("invalid samples: {0}")]
    InvalidSamples(String),

    #[error("toughness must be positive, got {0}")]
    InvalidToughness(f64),

    #[error("speed {0} outside the admissible range")]
    SpeedOutOfRange(f64),

    #[error("target is neither passive nor active: {0}")]
    IncompatibleTarget(String),

    #[error("incompatible data: {0}")]
    IncompatibleData(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("horizon {horizon} exceeded before the initial branch terminated")]
    HorizonExceeded { horizon: f64 },

    #[error("no admissible front speed at t = {t} (|ybar1 + ybar0'|^2 = {y}, 2 kappa = {k})")]
    DeadEnd { t: f64, y: f64, k: f64 },

    #[error("backward branch reached t = 0 before t + L(t) = T")]
    NoTermination,

    #[error("C1 branch would need a speed jump at t = {t}")]
    C1SwitchViolation { t: f64 },

    #[error("infeasible control time: {0}")]
    InfeasibleTime(String),

    #[error("constraint |ybar1 + ybar0'|^2 <= 2 kappa violated by {excess} at x = {x}")]
    ConstraintViolated { excess: f64, x: f64 },

    #[error("assembled control has a jump of {jump} at s = {at}")]
    ContinuityFailure { jump: f64, at: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
