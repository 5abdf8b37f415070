use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid arc representation: {0}")]
    ArcRepresentation(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("set is not Beurling-Carleson: {0}")]
    NotBeurlingCarleson(String),
    #[error("profile not integrable for these parameters: {0}")]
    ProfileIntegrability(String),
    #[error("evaluation on the singular support (distance {dist:.3e})")]
    OnSingularSupport { dist: f64 },
    #[error("unsupported derivative order {0} (max 4)")]
    UnsupportedOrder(u32),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("grid size must be a power of two >= 8, got {0}")]
    BadGridSize(usize),
    #[error("measure has a nonzero Korenblum-Roberts part (mass {0:.6})")]
    KorenblumRobertsPart(f64),
    #[error("decomposition required before truncation: {0}")]
    DecompositionRequired(String),
    #[error("derivative unavailable for sampled-only disc function")]
    DerivativeUnavailable,
    #[error("unsupported function form: {0}")]
    UnsupportedForm(String),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
