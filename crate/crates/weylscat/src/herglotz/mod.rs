//! Matrix Herglotz (Nevanlinna) functions: measure models, evaluation off the
//! real axis, boundary values, property checks, and measure recovery.

pub mod boundary;
pub mod measure;
pub mod sampler;
pub mod stieltjes;

pub use boundary::{boundary_limit, extrapolate_to_axis, BoundarySchedule};
pub use measure::{cauchy_kernel, Atom, DensityKind, DensityPiece, NevanlinnaMeasure, Tail};
pub use sampler::{eval_weyl, gamma_gram, verify_herglotz, HerglotzReport, HerglotzRow, WeylSampler};
pub use stieltjes::{stieltjes_invert, stieltjes_invert_with};
