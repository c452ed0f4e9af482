//! Crate-wide error type. Every fallible operation returns `Result<T, Error>`;
//! statistical "no signal" outcomes are ordinary result variants, not errors.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point kind does not match space kind ({0})")]
    PointSpaceMismatch(&'static str),

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("beta must exceed 1, got {0}")]
    InvalidBeta(f64),

    #[error("cantor depth must be in 1..=40, got {0}")]
    InvalidCantorDepth(u32),

    #[error("fewer than 2 distinct radii in the scale list")]
    DegenerateScales,

    #[error("{0}")]
    InvalidTransition(String),

    #[error("process kind {kind} requires a {wanted} space, got {got}")]
    ProcessSpaceMismatch {
        kind: &'static str,
        wanted: &'static str,
        got: String,
    },

    #[error("operation requires a dynamical process kind, got {0}")]
    NotDynamical(&'static str),

    #[error("trajectory length must be at least 1")]
    EmptyTrajectory,

    #[error("lags must be strictly increasing, nonempty, and at most the horizon")]
    BadLags,

    #[error("no trajectory visited test ball {ball} at lag {lag}; cannot normalize")]
    ZeroMeasureTestBall { ball: usize, lag: usize },

    #[error("schedule index must be >= 1")]
    ZeroIndex,

    #[error("radius schedule must be positive and nonincreasing ({0})")]
    InvalidSchedule(String),

    #[error("dimension function must satisfy {0}")]
    InvalidDimensionFunction(String),

    #[error("f(r)/r^s decreases as r shrinks; inflation needs a nondecreasing ratio")]
    RatioNotMonotone,

    #[error("window indices must satisfy 1 <= first <= last")]
    InvalidWindow,

    #[error("window ladder must be nonempty, disjoint, and increasing")]
    InvalidLadder,

    #[error("lambda must lie strictly between 0 and 1, got {0}")]
    InvalidLambda(f64),

    #[error("hit statistics are empty or all-zero; second moment vanishes")]
    DegenerateHits,

    #[error("at least one trial is required")]
    NoTrials,

    #[error("at least one probe point is required")]
    NoProbes,

    #[error("mesh must contain at least one ball with positive radius")]
    EmptyMesh,

    #[error("tail start n0 must satisfy 1 <= n0 <= n1")]
    BadTailRange,

    #[error("box-count scales must be >= 4 values spanning >= 2 octaves")]
    BadScaleRange,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
