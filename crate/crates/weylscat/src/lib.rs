//! Numerical toolkit for matrix Herglotz (Nevanlinna) functions and the
//! scattering matrices they generate.
//!
//! The crate evaluates measure-based models of matrix functions with
//! positive imaginary part, takes their boundary values from the upper
//! half-plane, builds the fiber scattering matrices of selfadjoint and
//! dissipative systems from those boundary values, and solves the inverse
//! problem: from a contractive analytic matrix function back to a measure
//! model whose channel scattering matrix reproduces it.
//!
//! Modules:
//! * [`linalg`] - dense complex-matrix primitives (Hermitian eigen, PSD
//!   roots, range bases, defects).
//! * [`quad`] - adaptive Gauss-Kronrod quadrature for matrix integrands.
//! * [`herglotz`] - measure models, evaluation, boundary limits, Herglotz
//!   property checks, Stieltjes inversion.
//! * [`scattering`] - fiber, coupled, and channel scattering matrices.
//! * [`inverse`] - Cayley transforms, admissibility checks, realization of
//!   contractions as channel scattering matrices.
//! * [`models`] - bundled analytic models and the brute-force quadrature
//!   oracle.

pub mod error;
pub mod herglotz;
pub mod inverse;
pub mod linalg;
pub mod models;
pub mod quad;
pub mod scattering;

pub use error::{Error, Result};
pub use herglotz::{
    boundary_limit, eval_weyl, gamma_gram, stieltjes_invert, verify_herglotz, Atom,
    BoundarySchedule, DensityKind, DensityPiece, HerglotzReport, NevanlinnaMeasure, Tail,
    WeylSampler,
};
pub use inverse::{
    check_admissibility, m_to_w, realize, w_to_m, AdmissibilityReport, ContractiveSampler,
};
pub use linalg::{
    defect_contraction, defect_unitary, herm_eigh, psd_sqrt, range_basis, CMatrix, HermEig,
    DEFAULT_RTOL,
};
pub use models::{build_model, quadrature_oracle, BuiltModel, ModelSpec};
pub use scattering::{
    assemble_nonsimple, coupled_blocks, coupled_scattering, lax_phillips, scattering_matrix,
    scattering_sweep, spectral_density_cross_check, CoupledBlocks, DissipativeMatrix,
    SampleStatus, ScatteringSample, SpectralCrossCheck,
};
