use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown function family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` expects {expected} parameter(s), got {got}")]
    Arity {
        family: String,
        expected: String,
        got: usize,
    },

    #[error("parameter out of domain for `{family}`: {reason}")]
    ParamDomain { family: String, reason: String },

    #[error("evaluation at r = {r} outside the domain (r must exceed {min})")]
    Domain { r: f64, min: f64 },

    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("warping function is not positive at r = {r}")]
    NonPositiveSigma { r: f64 },

    #[error("tau must be positive and finite, got {0}")]
    InvalidTau(f64),

    #[error("empty grid")]
    EmptyGrid,

    #[error("{quantity} is not strictly positive at r = {r}")]
    NonPositive { quantity: String, r: f64 },

    #[error("non-finite integrand sample at r = {r}")]
    NonFinite { r: f64 },

    #[error("quadrature panel budget exhausted ({panels} panels, relative error {achieved:e})")]
    QuadratureBudget { panels: usize, achieved: f64 },

    #[error("weights inadmissible at r = {r}: {condition}")]
    Inadmissible { r: f64, condition: String },

    #[error("test-function support starts at {a}, which is not inside the end (r0 = {r0})")]
    SupportOutsideEnd { a: f64, r0: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not convergent: {0}")]
    NonConvergent(String),

    #[error("flux too large: sigma^(2(n-1)) - c^2 < 0 at r = {r}")]
    FluxTooLarge { r: f64 },

    #[error("fit window: {0}")]
    FitWindow(String),

    #[error("case {case}: {param} = {value} is out of range ({hint})")]
    ParamRange {
        case: String,
        param: String,
        value: f64,
        hint: String,
    },

    #[error("missing envelope: {0}")]
    MissingEnvelope(String),

    #[error("output: {0}")]
    Io(String),
}
