use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol {0} has no assigned operator")]
    UnassignedSymbol(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("vector is not a unit vector (norm {0})")]
    NonUnitVector(f64),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("space dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("unknown tag {0}")]
    UnknownTag(usize),
    #[error("incompatible factor data: {0}")]
    IncompatibleFactors(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("factor is not centered (state value {0:.3e})")]
    NotCentered(f64),
    #[error("depth mismatch: {0}")]
    DepthMismatch(String),
    #[error("interior margin {margin} leaves no interior at depth {depth}")]
    MarginViolation { margin: usize, depth: usize },
    #[error("map is not completely positive (Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("basis does not span a *-subalgebra (residual {0:.3e})")]
    NotSubalgebra(f64),
    #[error("precondition violated: {what} (residual {residual:.3e})")]
    Precondition { what: String, residual: f64 },
    #[error("state incompatibility on factor {factor} (residual {residual:.3e})")]
    StateIncompatible { factor: usize, residual: f64 },
    #[error("witness has zero 2-norm")]
    DegenerateWitness,
    #[error("no convergence after {iterations} iterations (last change {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("missing state for tag {0}")]
    MissingState(usize),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("Gram matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NonPsdGram(f64),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o or format error: {0}")]
    Io(String),
}
