use std::fmt;

use thiserror::Error;

use crate::scalar::ParseScalarError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Asymmetry,
    Negative,
    ZeroOffDiagonal,
    NonzeroDiagonal,
    Triangle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Asymmetry => "asymmetry",
            ViolationKind::Negative => "negative",
            ViolationKind::ZeroOffDiagonal => "zero-offdiagonal",
            ViolationKind::NonzeroDiagonal => "nonzero-diagonal",
            ViolationKind::Triangle => "triangle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Witness labels: a pair for pointwise violations, `(a, c, b)` for a
    /// triangle violation `d(a,b) > d(a,c) + d(c,b)`.
    #[error("metric violation ({kind}) at {witness:?}")]
    MetricViolation {
        kind: ViolationKind,
        witness: Vec<String>,
    },
    #[error("duplicate points at indices {0:?}")]
    DuplicatePoint(Vec<usize>),
    #[error("subset does not contain the base point")]
    BaseNotIncluded,
    #[error("subspace mismatch: {0}")]
    SubspaceMismatch(String),
    #[error("duality gap {gap} exceeds tolerance")]
    DualityGapExceeded { gap: String },
    #[error("greedy chain too short (length {0})")]
    ChainTooShort(usize),
    #[error("separated set too small (size {0})")]
    SeparatedSetTooSmall(usize),
    #[error("no pairs found")]
    NoPairsFound,
    #[error("pair system fails verification")]
    UnverifiedSystem,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("space has {size} points, above the cap of {cap}")]
    SpaceTooLarge { size: usize, cap: usize },
    #[error("basis vectors are linearly dependent")]
    SingularBasis,
    #[error("map is not invertible")]
    SingularMap,
    #[error("space carries no amalgam summand tags")]
    NotAnAmalgam,
    #[error("point {0} is not on the expected grid")]
    PointNotOnGrid(String),
    #[error("balls of radius 2*delta overlap (delta = {0})")]
    BallsOverlap(f64),
    #[error("mollification error estimate {achieved} is not below {target}")]
    MollificationTooCoarse { achieved: f64, target: f64 },
    #[error("dimension {0} unsupported")]
    UnsupportedDimension(usize),
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("linear program is {0}")]
    Lp(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Parse(#[from] ParseScalarError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
