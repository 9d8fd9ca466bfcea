use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{p} is not prime")]
    CompositeP { p: u64 },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("enumeration of {requested} tuples exceeds the budget of {budget}")]
    BudgetExceeded { requested: BigUint, budget: u64 },

    #[error("group mismatch: {0}")]
    SpecMismatch(String),

    #[error("unsupported level: {0}")]
    UnsupportedLevel(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("target mismatch: {0} vs {1}")]
    TargetMismatch(String, String),

    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),

    #[error("count vector has zero total mass")]
    EmptyCount,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sum diverges at the requested epsilon (violating entries: {0:?})")]
    Divergent(Vec<(usize, usize)>),

    #[error("expression is not integrable at epsilon = 0 (entry {0:?} is non-negative)")]
    NotL1((usize, usize)),

    #[error("closed form only available for monomials x^n: {0}")]
    UnsupportedPolynomial(String),

    #[error("alpha must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("sign vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },

    #[error("grid of {grid_points} points too coarse: error bound {error_bound:e} exceeds 1% of {norm:e}")]
    GridTooCoarse { grid_points: u64, error_bound: f64, norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no admissible sign vector after {trials} trials")]
    SearchExhausted {
        trials: usize,
        best: Box<crate::appendix::SearchOutcome>,
    },

    #[error("corrupt count cache: {0}")]
    CorruptCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CompositeP { .. } => "CompositeP",
            Error::Overflow(_) => "Overflow",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::SpecMismatch(_) => "SpecMismatch",
            Error::UnsupportedLevel(_) => "UnsupportedLevel",
            Error::Parse { .. } => "ParseError",
            Error::Arity { .. } => "ArityError",
            Error::TargetMismatch(..) => "TargetMismatch",
            Error::UnknownName(_) => "UnknownName",
            Error::EmptyCount => "EmptyCount",
            Error::Domain(_) => "DomainError",
            Error::Divergent(_) => "Divergent",
            Error::NotL1(_) => "NotL1",
            Error::UnsupportedPolynomial(_) => "UnsupportedPolynomial",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::BadLength { .. } => "BadLength",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::Precondition(_) => "Precondition",
            Error::SearchExhausted { .. } => "SearchExhausted",
            Error::CorruptCache(_) => "CorruptCache",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
