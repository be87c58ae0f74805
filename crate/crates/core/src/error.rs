use thiserror::Error;

/// Library error type shared by every module.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Evaluation hit a singular point: division by zero, log of a
    /// non-positive value, sqrt of a negative, or a non-finite result.
    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),

    /// Too many sample points were singular to complete a sampled decision.
    #[error("insufficient samples: requested {requested}, only {valid} usable")]
    InsufficientSamples { requested: usize, valid: usize },

    /// A pair factor or Phi function vanishes where it must not.
    #[error("vanishing factor: {0}")]
    VanishingFactor(String),

    /// Two warped-product block constants coincide.
    #[error("duplicate block constant e = {0}")]
    DuplicateE(f64),

    /// The requested concircular tensor is a constant multiple of the metric.
    #[error("trivial tensor: constant multiple of the metric")]
    TrivialTensor,

    /// The web violates the residual system required for classification.
    #[error("residual violation: {0}")]
    ResidualViolation(String),

    /// A connected web with no connecting coordinate: impossible for genuine
    /// solutions, so it signals bad input or a tolerance failure.
    #[error("inconsistent web: {0}")]
    InconsistentWeb(String),

    /// Sectional curvature of a (numerically) degenerate 2-plane.
    #[error("degenerate 2-plane")]
    DegeneratePlane,

    /// Structural problem with an input object (dimension mismatch, point
    /// outside the chart box, non-constant signature, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Syntax error from the .web file parser.
    #[error("{0}")]
    Parse(ParseError),

    /// An expression references a coordinate that was not declared.
    #[error("line {line}: undeclared coordinate `{name}`")]
    UndeclaredCoordinate { name: String, line: usize },

    /// The same coordinate or component was declared twice.
    #[error("line {line}: duplicate declaration of `{name}`")]
    DuplicateDeclaration { name: String, line: usize },

    /// Body lines from more than one mode, or lines that do not belong to
    /// the declared mode.
    #[error("line {line}: mixed mode: {detail}")]
    MixedMode { detail: String, line: usize },
}

/// Parse error with position and the token set that would have been accepted.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "parse error at line {}, col {}: {} (expected {})",
            self.line,
            self.col,
            self.message,
            self.expected.join(" | ")
        )
    }
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
