use crate::quadrature::QuadratureResult;
use num_complex::Complex64;

/// Errors raised by the numerical kernels and the experiment layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not reach tolerance (value {:.6e}, bound {:.6e}, {} cells)", .partial.value, .partial.error_bound, .partial.cells_used)]
    NonConvergent { partial: QuadratureResult },

    #[error("objective failed at a = {a}: {source}")]
    AtPoint {
        a: Complex64,
        #[source]
        source: Box<Error>,
    },

    #[error("ODE step size underflow at t = {t:.6e}, x = {x}")]
    StepUnderflow { t: f64, x: Complex64 },

    #[error("ODE step budget exhausted at t = {t:.6e}, x = {x}")]
    StepBudget { t: f64, x: Complex64 },

    #[error("semigroup classification ambiguous; trajectory tail {tail:?}")]
    Ambiguous { tail: Vec<(f64, Complex64)> },

    #[error("composition radius violated: |g| reaches {reached:.6} > allowed {allowed:.6}")]
    CompositionRadius { reached: f64, allowed: f64 },

    #[error("self-map violation: |phi({at})| = {modulus:.6} >= 1")]
    NotSelfMap { at: Complex64, modulus: f64 },

    #[error("integration path crosses a zero of the generator near {0}")]
    PathThroughZero(Complex64),

    #[error("generator vanishes on the sampled annulus near {0}")]
    GeneratorZero(Complex64),

    #[error("non-positive weight sample {value:.6e} at {at}")]
    NonPositiveWeight { at: Complex64, value: f64 },

    #[error("witness search exhausted at round {round}: {reason}")]
    SearchExhausted {
        round: usize,
        reason: String,
        margins: Vec<(String, f64)>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn at_point(self, a: Complex64) -> Self {
        match self {
            e @ Error::AtPoint { .. } => e,
            other => Error::AtPoint { a, source: Box::new(other) },
        }
    }

    /// Parse error with the 1-based line of the offending span.
    pub(crate) fn from_toml(text: &str, e: &toml::de::Error) -> Self {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(0);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    }

    /// True when the failure is a quadrature non-convergence, possibly wrapped.
    pub fn is_non_convergent(&self) -> bool {
        match self {
            Error::NonConvergent { .. } => true,
            Error::AtPoint { source, .. } => source.is_non_convergent(),
            _ => false,
        }
    }
}
