//! Crate-wide error type.
//!
//! Every fallible operation in the library reports through [`Error`]; the CLI
//! maps variants onto process exit codes (config 2, model assumptions 3,
//! solver failures 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A coefficient moment integral failed to converge under refinement.
    #[error("moment of {coeff} with power {power} did not converge: {detail}")]
    NonIntegrable {
        coeff: &'static str,
        power: f64,
        detail: String,
    },

    /// A moment that must be positive came out zero or negative.
    #[error("moment of {coeff} with power {power} must be positive, got {value}")]
    NegativeMoment {
        coeff: &'static str,
        power: f64,
        value: f64,
    },

    /// The constitutive model violates the structural assumptions.
    #[error("constitutive assumption violated: {0}")]
    AssumptionViolated(String),

    /// Invalid grid parameters (size must be even and positive, domain positive).
    #[error("invalid grid: {0}")]
    Grid(String),

    /// The shared coefficient quadrature cannot certify the requested accuracy.
    #[error("coefficient quadrature insufficient: {0}")]
    QuadratureInsufficient(String),

    /// The remainder force was evaluated outside its certified range |r| <= 1.
    #[error("remainder force evaluated at |r| = {max_abs_r:.6e} > 1")]
    RemainderBoundExceeded { max_abs_r: f64 },

    /// The periodic domain truncates the solitary profile too aggressively.
    #[error("domain too small: profile tail {tail:.3e} exceeds {limit:.3e} at the boundary")]
    DomainTooSmall { tail: f64, limit: f64 },

    /// The inner Krylov solve hit its iteration cap.
    #[error(
        "inner solve stalled after {iterations} iterations, residual {residual:.3e} \
         (smallest Ritz magnitude {min_ritz:.3e})"
    )]
    InnerSolveStalled {
        iterations: usize,
        residual: f64,
        min_ritz: f64,
    },

    /// The outer fixed-point iteration stopped contracting.
    #[error("fixed-point iteration not contracting: step ratio {ratio:.3} at iteration {iteration}")]
    NotContracting { ratio: f64, iteration: usize },

    /// An outer iterate left the trust ball around the predictor.
    #[error("iterate left trust region: |V| = {norm:.3e} > {radius:.3e}")]
    LeftTrustRegion { norm: f64, radius: f64 },

    /// The two residual forms of a computed wave disagree beyond their
    /// algebraic scaling; signals an internal inconsistency.
    #[error("residual forms disagree: operator form {operator:.3e}, eigenvalue form {eigenvalue:.3e}")]
    FormMismatch { operator: f64, eigenvalue: f64 },

    /// The physical grid is too coarse for the requested wave.
    #[error("simulation grid too coarse: spacing {dy:.4e} exceeds limit {limit:.4e}")]
    ResolutionTooCoarse { dy: f64, limit: f64 },

    /// The physical domain cannot hold the rescaled wave.
    #[error("simulation domain mismatch: eps*Ly = {scaled:.4} < required {required:.4}")]
    DomainMismatch { scaled: f64, required: f64 },

    /// The time integration diverged.
    #[error("simulation blow-up at t = {time:.4}: max |u| = {max_abs_u:.3e}")]
    BlowUp { time: f64, max_abs_u: f64 },

    /// Not enough translation (or history) to estimate a wave speed.
    #[error("insufficient translation for speed measurement: {0}")]
    InsufficientTranslation(String),

    /// Config file parse or validation failure.
    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable tag, safe for CSV cells and log greps.
    pub fn token(&self) -> &'static str {
        match self {
            Error::NonIntegrable { .. } => "non_integrable",
            Error::NegativeMoment { .. } => "negative_moment",
            Error::AssumptionViolated(_) => "assumption_violated",
            Error::Grid(_) => "grid",
            Error::QuadratureInsufficient(_) => "quadrature_insufficient",
            Error::RemainderBoundExceeded { .. } => "remainder_bound_exceeded",
            Error::DomainTooSmall { .. } => "domain_too_small",
            Error::InnerSolveStalled { .. } => "inner_solve_stalled",
            Error::NotContracting { .. } => "not_contracting",
            Error::LeftTrustRegion { .. } => "left_trust_region",
            Error::FormMismatch { .. } => "form_mismatch",
            Error::ResolutionTooCoarse { .. } => "resolution_too_coarse",
            Error::DomainMismatch { .. } => "domain_mismatch",
            Error::BlowUp { .. } => "blow_up",
            Error::InsufficientTranslation(_) => "insufficient_translation",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
