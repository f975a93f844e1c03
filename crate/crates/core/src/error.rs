use thiserror::Error;

/// Byte range `[start, end)` into an expression's source text.
pub type Span = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable `{name}` at byte {pos} is out of range (expected k1..k{n_vars})")]
    VariableOutOfRange { pos: usize, name: String, n_vars: usize },
    #[error("exponent at byte {pos} must be a constant integer")]
    NonIntegerExponent { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::VariableOutOfRange { pos, .. }
            | ParseError::NonIntegerExponent { pos } => *pos,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at bytes {}..{}", span.0, span.1)]
    DivisionByZero { span: Span },
    #[error("logarithm of a non-positive real at bytes {}..{}", span.0, span.1)]
    LogOfNonPositive { span: Span },
    #[error("non-finite value at bytes {}..{}", span.0, span.1)]
    NonFinite { span: Span },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("integrand failed at node {node:?}: {source}")]
    Integrand {
        node: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// An inner matrix of the continued fraction is numerically singular,
    /// or lambda sits within the exclusion margin of an inner component.
    #[error("spectral proximity at level {level}: lambda = {lambda_re}{lambda_im:+}i, rcond = {rcond:.3e}")]
    SpectralProximity {
        level: usize,
        lambda_re: f64,
        lambda_im: f64,
        rcond: f64,
    },

    #[error("inconsistent spectral data: reconstructed A_{level} depends on lambda (deviation {deviation:.3e})")]
    InconsistentSpectralData { level: usize, deviation: f64 },

    #[error("branch data violates the disjointness condition at {} point(s)", .0.len())]
    BranchCondition(Vec<BranchViolation>),

    /// A data file that is not valid JSON or does not match its schema.
    #[error("{path}: line {line}, column {column}: {message}")]
    Format {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

/// A probe point at which a branch value falls inside (or within the margin
/// of) the projection of a lower branch.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BranchViolation {
    pub level: usize,
    pub k_tail: Vec<f64>,
    pub value: f64,
    pub distance: f64,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
