//! Shared error type for the whole crate.

use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eig:.3e} below tolerance)")]
    NotPsd { min_eig: f64 },

    #[error("matrix numerically singular (condition estimate {cond:.3e})")]
    Singular { cond: f64 },

    #[error("evaluation point {eta} lies on the real axis")]
    RealAxisEvaluation { eta: Complex64 },

    #[error("adaptive quadrature exhausted its budget ({panels} panels, residual error {err:.3e})")]
    QuadratureFailure { panels: usize, err: f64 },

    #[error("boundary extrapolation diverges at lambda = {lambda} (pole or point mass)")]
    NoConvergence { lambda: f64 },

    #[error("support grid does not cover the measure (estimated edge mass fraction {fraction:.3e})")]
    SupportNotCovered { fraction: f64 },

    #[error("Weyl value numerically singular at the sample point (condition estimate {cond:.3e})")]
    SingularWeylValue { cond: f64 },

    #[error("coupled resolvent (D - M) numerically singular (condition estimate {cond:.3e})")]
    SingularCoupledValue { cond: f64 },

    #[error("matrix parameter is not strictly dissipative (largest eigenvalue of Im D is {max_im_eig:.3e})")]
    NotDissipative { max_im_eig: f64 },

    #[error("Cayley transform singular: I - W has condition estimate {cond:.3e} (eigenvalue 1 of W)")]
    CayleySingular { cond: f64 },

    #[error("contraction bound violated: operator norm {norm:.6} exceeds 1")]
    ContractionViolated { norm: f64 },

    #[error("admissibility check failed: {reason}")]
    AdmissibilityFailed { reason: String },

    #[error("unknown model name: {name}")]
    UnknownModel { name: String },

    #[error("bad model parameters: {reason}")]
    BadParameters { reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
