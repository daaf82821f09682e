use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index must be at least 1, got 0")]
    ZeroIndex,

    #[error("index {0} is out of range (must be below 2^63)")]
    IndexTooLarge(u64),

    #[error("index {index} lies outside the window [2^{s}, 2^{top})", top = s + 1)]
    OutsideWindow { index: u64, s: u32 },

    #[error("index family for window s={0} is empty")]
    EmptyWindow(u32),

    #[error("resolution {0} exceeds the maximum of {max}", max = crate::MAX_RESOLUTION)]
    ResolutionTooLarge(u32),

    #[error("{what} requires resolution at least {needed}, got {got}")]
    ResolutionTooSmall {
        what: &'static str,
        needed: u32,
        got: u32,
    },

    #[error("value array has length {got}, expected 2^{resolution}")]
    LengthMismatch { resolution: u32, got: usize },

    #[error("exponent p must be a positive rational, got {0}")]
    InvalidExponent(String),

    #[error("shell decomposition needs M >= 1")]
    EmptyShellDecomposition,

    #[error("unit point coordinate {s} is not below resolution {resolution}")]
    UnitPointOutOfRange { s: u32, resolution: u32 },

    #[error("coset anchor {anchor} does not fit in {depth} coordinates")]
    AnchorOutOfRange { anchor: u64, depth: u32 },

    #[error("coset depth {depth} exceeds resolution {resolution}")]
    CosetTooDeep { depth: u32, resolution: u32 },

    #[error("partial sum index {n} outside [1, 2^{resolution}]")]
    PartialSumIndex { n: u64, resolution: u32 },

    #[error("the index set is empty")]
    EmptyIndexSet,

    #[error("index set is not admissible for weight family {family}: {reason}")]
    InadmissibleIndexSet {
        family: &'static str,
        reason: String,
    },

    #[error("weight {family} is undefined at n={n}: {reason}")]
    UndefinedWeight {
        family: &'static str,
        n: u64,
        reason: &'static str,
    },

    #[error("{what} at resolution {resolution} is beyond the supported limit {limit}")]
    TooCostly {
        what: &'static str,
        resolution: u32,
        limit: u32,
    },

    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    #[error("counterexample order n_k={0} is below the admissible minimum 3")]
    CounterexampleOrder(u32),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid rational literal {0:?}")]
    RationalLiteral(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}
