use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The observer sits on (or within the guard band of) a singular set:
    /// the branch circle, the disk, a spheroid cut, or a pole of the wavelet.
    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("source vector must be nonzero")]
    ZeroSourceVector,

    #[error("Cauchy kernel evaluated at zero complex time")]
    ZeroArgument,

    #[error("emission center is not timelike: requires |b| > |a| (got |b| = {b}, |a| = {a})")]
    NotTimelike { a: f64, b: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("point is not on the spheroid S_alpha (|p - alpha| = {0:e})")]
    OffSurface(f64),

    #[error("quadrature node hit a singularity: {0}")]
    SingularEncounter(String),

    #[error("finite-difference stencil hit a singularity: {0}")]
    StencilHitsSingularity(String),

    #[error("adaptive quadrature exceeded its subdivision budget (estimate {value:e}, error {error:e})")]
    MaxDepthExceeded { value: f64, error: f64 },

    #[error("pulse peak not found: {0}")]
    PeakNotFound(String),

    #[error("unknown verification suite '{0}'")]
    UnknownSuite(String),
}
