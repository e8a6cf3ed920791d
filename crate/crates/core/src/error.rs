use alloc::string::String;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("epsilon out of (0,1): {0}")]
    EpsilonOutOfRange(f64),
    #[error("kappa out of [0,1): {0}")]
    KappaOutOfRange(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kernel evaluated at the origin")]
    SingularKernel,
    #[error("grid functions live on different quadrature rules")]
    RuleMismatch,
    #[error("quadrature did not converge (estimated error {0:e})")]
    QuadratureFailure(f64),
    #[error(
        "no eigenvalue root for m = {m}, kappa = {kappa}: I({lo:e}) = {value} < 1 (kappa too large for this mode)"
    )]
    BracketFailure {
        m: usize,
        kappa: f64,
        lo: f64,
        value: f64,
    },
    #[error("iteration did not contract after {iterations} steps (last relative change {change:e})")]
    NonContraction { iterations: usize, change: f64 },
    #[error("resolvent undefined for n = m = {0}")]
    ModeCollision(usize),
    #[error("right-hand side outside the range: obstruction {obstruction:e} exceeds {tolerance:e}")]
    Obstruction { obstruction: f64, tolerance: f64 },
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("level curves not monotone: min(1 + f_y) = {0}")]
    NonMonotone(f64),
    #[error("sigma too large: sigma * max|h_y| = {0} >= 0.5")]
    SigmaTooLarge(f64),
    #[error("singular linear system: {0}")]
    SingularSystem(&'static str),
    #[error("{0} is distributional for kappa = 0")]
    Distributional(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
