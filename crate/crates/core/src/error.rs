use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error)]
pub enum VeldtError {
    /// An integrand or one of its derivatives returned a non-finite value.
    #[error("non-finite {what} at x = {x:?} (entry {entry})")]
    Evaluation {
        what: &'static str,
        x: Vec<f64>,
        entry: String,
    },

    /// Invalid user-supplied configuration (growth exponents, radii, documents).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The requested combination is outside what this toolkit implements.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A prerequisite quantity was not supplied.
    #[error("missing dependency: {0}")]
    Dependency(String),

    /// Linear-algebra failure on the discretization (e.g. Gram matrix not SPD).
    #[error("discretization error: {0}")]
    Discretization(String),

    /// The hinted kernel is not separated from the rest of the spectrum.
    #[error(
        "ambiguous kernel: hinted dimension {hint}, kernel threshold {threshold:.3e}, \
         next eigenvalue magnitude {next:.3e}; refine the discretization"
    )]
    DegeneracyResolution {
        hint: usize,
        threshold: f64,
        next: f64,
    },

    /// A standing hypothesis of the theory does not hold numerically.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// The requested parameter coincides with a pencil eigenvalue.
    #[error("parameter {lambda} collides with pencil eigenvalue {eigenvalue}; offset it")]
    EigenvalueCollision { lambda: f64, eigenvalue: f64 },

    /// Direct and formula-based counts disagree.
    #[error("inconsistent index data: {0}")]
    Inconsistency(String),

    /// Newton on the complement equation did not converge.
    #[error("reduction failed after {iterations} iterations (last residual {residual:.3e})")]
    ReductionFailure { iterations: usize, residual: f64 },

    /// A block that must be invertible is singular.
    #[error("degenerate operator: {0}")]
    Degeneracy(String),

    /// An analytic identity failed its finite-difference cross-check.
    #[error("identity check failed: {0}")]
    IdentityViolation(String),

    /// The origin of the reduced functional is not an isolated critical point.
    #[error(
        "critical point not isolated: nearest other critical point at distance {distance:.3e}"
    )]
    NotIsolated { distance: f64 },

    /// The Morse audit found a degenerate critical point.
    #[error("audit aborted: degenerate critical point with nullity {nullity} at norm {norm:.3e}")]
    AuditAborted { nullity: usize, norm: f64 },

    /// Damped Newton did not reach the residual tolerance.
    #[error("Newton did not converge in {iterations} iterations (residual {residual:.3e})")]
    NewtonFailure { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = VeldtError> = std::result::Result<T, E>;
