use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported spatial dimension {0} (only 1 and 2 are supported)")]
    UnsupportedDimension(usize),

    #[error("quadrature order {0} out of range 1..=512")]
    QuadratureOrder(usize),

    #[error("grid of order {order} cannot resolve degree {degree}: need at least {required} nodes per axis")]
    UnderResolvedGrid { order: usize, degree: usize, required: usize },

    #[error("grid is not a Gauss-Hermite tensor grid")]
    NotGaussHermiteGrid,

    #[error("uniform grid needs an odd number of points >= 3 per axis, got {0}")]
    UniformGridPoints(usize),

    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("spectral fields have incompatible shapes")]
    ShapeMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("Mehler path requires t >= {min}, got {t}; use the spectral path")]
    MehlerTimeTooSmall { t: f64, min: f64 },

    #[error("Mehler kernel path is only available for beta = 1 (got beta = {0})")]
    UnsupportedPath(f64),

    #[error("adaptive quadrature did not reach tolerance (error estimate {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },

    #[error("exponent pair (p = {p}, q = {q}) is not admissible for beta = {beta}")]
    InadmissibleExponents { p: f64, q: f64, beta: f64 },

    #[error("Luxemburg norm unbounded: integral stays above 1 up to lambda = {lambda_max:e}")]
    NormUnbounded { lambda_max: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("Picard iteration did not converge in {iterations} iterations (last increment {increment:e})")]
    NonConvergent { iterations: usize, increment: f64 },

    #[error("spectral tail holds {fraction:.3} of the energy above level {level}")]
    UnderResolved { fraction: f64, level: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
