//! Scattering matrices from boundary values of Weyl functions.
//!
//! Given the boundary value `M = M(lambda + i0)` of a matrix Herglotz
//! function, the selfadjoint scattering matrix acts on the fiber
//! `ran Im M` as
//!
//!   `S(lambda) = I - 2i sqrt(Im M) M^{-1} sqrt(Im M)`,
//!
//! represented here in an orthonormal fiber basis. A strictly dissipative
//! parameter `D` (Im D negative definite) couples a dissipative extension to
//! a transport channel; the coupled scattering matrix is the same formula
//! with `M - D` in place of `M` and acts on the full space, its block form
//! splits over fiber + channel, and the lower-right channel block
//!
//!   `S_lp(lambda) = I + 2i sqrt(-Im D) (D - M)^{-1} sqrt(-Im D)`
//!
//! is the contractive scattering matrix of the associated in/outgoing
//! translation representation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::herglotz::{boundary_limit, BoundarySchedule, WeylSampler};
use crate::linalg::{
    defect_unitary, fro_norm, herm_eigh, identity, im_part, inverse_with_cond, psd_sqrt,
    range_basis_with_floor, solve_with_cond, CMatrix, DEFAULT_RTOL,
};

const COND_LIMIT: f64 = 1e12;

/// Strictly dissipative matrix parameter: `Im D` negative definite.
#[derive(Debug, Clone)]
pub struct DissipativeMatrix {
    d: CMatrix,
    sqrt_neg_im: CMatrix,
}

impl DissipativeMatrix {
    pub fn new(d: CMatrix) -> Result<Self> {
        Self::with_rtol(d, DEFAULT_RTOL)
    }

    /// Validates that the largest eigenvalue of `Im D` stays below
    /// `-rtol * ||D||_F`, i.e. the imaginary part is strictly negative.
    pub fn with_rtol(d: CMatrix, rtol: f64) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::NotSquare {
                rows: d.nrows(),
                cols: d.ncols(),
            });
        }
        crate::linalg::ensure_finite(&d)?;
        let im = im_part(&d);
        let eig = herm_eigh(&im)?;
        let max_im_eig = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if max_im_eig > -rtol * fro_norm(&d) {
            return Err(Error::NotDissipative { max_im_eig });
        }
        let sqrt_neg_im = psd_sqrt(&(-im), rtol)?;
        Ok(DissipativeMatrix { d, sqrt_neg_im })
    }

    /// `-i` times the identity, the canonical parameter of the Cayley route.
    pub fn minus_i_identity(n: usize) -> Self {
        let d = identity(n) * Complex64::new(0.0, -1.0);
        DissipativeMatrix {
            sqrt_neg_im: identity(n),
            d,
        }
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.d
    }

    /// Principal square root of `-Im D` (positive definite).
    pub fn sqrt_neg_im(&self) -> &CMatrix {
        &self.sqrt_neg_im
    }
}

/// Row status of a lambda sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Ok,
    NoConvergence,
    SingularWeylValue,
}

/// Scattering data at one boundary point.
#[derive(Debug, Clone)]
pub struct ScatteringSample {
    pub lambda: f64,
    /// Fiber dimension, the rank of `Im M(lambda + i0)`.
    pub rank: usize,
    /// Orthonormal fiber basis (n x rank).
    pub fiber_basis: CMatrix,
    /// Scattering matrix in that basis (rank x rank; empty on rank 0).
    pub s: CMatrix,
    pub unitarity_defect: f64,
    /// Propagated boundary-limit error estimate.
    pub err_estimate: f64,
    pub status: SampleStatus,
}

impl ScatteringSample {
    fn failed(lambda: f64, dim: usize, status: SampleStatus) -> Self {
        ScatteringSample {
            lambda,
            rank: 0,
            fiber_basis: CMatrix::zeros(dim, 0),
            s: CMatrix::zeros(0, 0),
            unitarity_defect: 0.0,
            err_estimate: f64::NAN,
            status,
        }
    }

    /// Bad samples carry a non-ok status or a unitarity defect above the cut.
    pub fn is_flagged(&self, defect_cut: f64) -> bool {
        self.status != SampleStatus::Ok || self.unitarity_defect > defect_cut
    }
}

/// Scattering matrix on the fiber of `Im Mval` for a boundary value `Mval`.
///
/// A near-zero `Im Mval` (relative to `||Mval||`) yields rank 0 with an
/// empty matrix: the fiber is trivial there and the scattering matrix has
/// nothing to act on.
pub fn scattering_matrix(mval: &CMatrix, rtol: f64) -> Result<ScatteringSample> {
    let n = mval.nrows();
    if mval.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: mval.ncols(),
        });
    }
    let im = im_part(mval);
    let abs_floor = rtol * fro_norm(mval);
    let (rank, q) = range_basis_with_floor(&im, rtol, abs_floor)?;
    if rank == 0 {
        return Ok(ScatteringSample {
            lambda: 0.0,
            rank: 0,
            fiber_basis: q,
            s: CMatrix::zeros(0, 0),
            unitarity_defect: 0.0,
            err_estimate: 0.0,
            status: SampleStatus::Ok,
        });
    }
    let sq = psd_sqrt(&im, rtol)?;
    let x = solve_with_cond(mval, &sq, COND_LIMIT, |cond| Error::SingularWeylValue { cond })?;
    let s_full = (&sq * x) * Complex64::new(0.0, -2.0);
    let s = identity(rank) + q.adjoint() * s_full * &q;
    let unitarity_defect = defect_unitary(&s)?;
    Ok(ScatteringSample {
        lambda: 0.0,
        rank,
        fiber_basis: q,
        s,
        unitarity_defect,
        err_estimate: 0.0,
        status: SampleStatus::Ok,
    })
}

/// Extends a fiber scattering matrix by the identity on `extra_dim`
/// additional channels (the selfadjoint part that scatters trivially).
pub fn assemble_nonsimple(sample: &ScatteringSample, extra_dim: usize) -> CMatrix {
    let rank = sample.rank;
    let total = rank + extra_dim;
    let mut out = identity(total);
    out.view_mut((0, 0), (rank, rank)).copy_from(&sample.s);
    out
}

/// Full-space scattering matrix of the coupled system:
/// `I - 2i sqrt(Im(M - D)) (M - D)^{-1} sqrt(Im(M - D))`.
///
/// `Im(M - D)` is positive definite whenever `Im M >= 0`, so the result is a
/// full `n x n` unitary; no fiber projection is involved.
pub fn coupled_scattering(mval: &CMatrix, d: &DissipativeMatrix) -> Result<CMatrix> {
    let mt = mval - d.matrix();
    let im = im_part(&mt);
    let eig = herm_eigh(&im)?;
    let min_eig = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min_eig <= 0.0 {
        return Err(Error::NotDissipative {
            max_im_eig: -min_eig,
        });
    }
    let sq = psd_sqrt(&im, DEFAULT_RTOL)?;
    let x = solve_with_cond(&mt, &sq, COND_LIMIT, |cond| Error::SingularCoupledValue { cond })?;
    Ok(identity(mval.nrows()) + (&sq * x) * Complex64::new(0.0, -2.0))
}

/// Block decomposition of the coupled scattering matrix over fiber + channel.
#[derive(Debug, Clone)]
pub struct CoupledBlocks {
    /// `sqrt(Im M) (D - M)^{-1} sqrt(Im M)` compressed to the fiber (rank x rank).
    pub s11: CMatrix,
    /// `sqrt(Im M) (D - M)^{-1} sqrt(-Im D)` fiber-compressed on the left (rank x n).
    pub s12: CMatrix,
    /// `sqrt(Im M) ... sqrt(-Im D)` mirrored, fiber-compressed on the right (n x rank).
    pub s21: CMatrix,
    /// `sqrt(-Im D) (D - M)^{-1} sqrt(-Im D)` (n x n).
    pub s22: CMatrix,
    /// `I + 2i [s11 s12; s21 s22]` on fiber + channel ((rank+n) x (rank+n)).
    pub full: CMatrix,
    pub rank: usize,
    pub fiber_basis: CMatrix,
}

/// Computes the blocks of the coupled scattering matrix.
///
/// The full `n x n` expressions are formed first and compressed with the
/// fiber basis afterwards, so rank decisions never happen inside products.
/// Both off-diagonal blocks use the PSD square root of `Im M`; the sign
/// convention is pinned by unitarity of the assembled matrix.
pub fn coupled_blocks(
    mval: &CMatrix,
    d: &DissipativeMatrix,
    rtol: f64,
) -> Result<CoupledBlocks> {
    let n = mval.nrows();
    if d.dim() != n {
        return Err(Error::BadParameters {
            reason: "dissipative parameter dimension mismatch".into(),
        });
    }
    let im = im_part(mval);
    let abs_floor = rtol * fro_norm(mval);
    let (rank, q) = range_basis_with_floor(&im, rtol, abs_floor)?;
    let sqm = if rank == 0 {
        CMatrix::zeros(n, n)
    } else {
        psd_sqrt(&im, rtol)?
    };
    let sqd = d.sqrt_neg_im();
    let resolvent = inverse_with_cond(&(d.matrix() - mval), COND_LIMIT, |cond| {
        Error::SingularCoupledValue { cond }
    })?;
    let s11_full = &sqm * &resolvent * &sqm;
    let s12_full = &sqm * &resolvent * sqd;
    let s21_full = sqd * &resolvent * &sqm;
    let s22 = sqd * &resolvent * sqd;
    let s11 = q.adjoint() * &s11_full * &q;
    let s12 = q.adjoint() * &s12_full;
    let s21 = &s21_full * &q;

    let total = rank + n;
    let mut full = identity(total);
    let two_i = Complex64::new(0.0, 2.0);
    full.view_mut((0, 0), (rank, rank))
        .zip_apply(&(&s11 * two_i), |o, x| *o += x);
    full.view_mut((0, rank), (rank, n)).copy_from(&(&s12 * two_i));
    full.view_mut((rank, 0), (n, rank)).copy_from(&(&s21 * two_i));
    full.view_mut((rank, rank), (n, n))
        .zip_apply(&(&s22 * two_i), |o, x| *o += x);

    Ok(CoupledBlocks {
        s11,
        s12,
        s21,
        s22,
        full,
        rank,
        fiber_basis: q,
    })
}

/// Channel scattering matrix
/// `I + 2i sqrt(-Im D) (D - M)^{-1} sqrt(-Im D)`; always a contraction.
pub fn lax_phillips(mval: &CMatrix, d: &DissipativeMatrix) -> Result<CMatrix> {
    let n = mval.nrows();
    if d.dim() != n {
        return Err(Error::BadParameters {
            reason: "dissipative parameter dimension mismatch".into(),
        });
    }
    let sqd = d.sqrt_neg_im();
    let resolvent = inverse_with_cond(&(d.matrix() - mval), COND_LIMIT, |cond| {
        Error::SingularCoupledValue { cond }
    })?;
    Ok(identity(n) + (sqd * resolvent * sqd) * Complex64::new(0.0, 2.0))
}

/// Cross-check of the scattering formula through the spectral-density route.
#[derive(Debug, Clone)]
pub struct SpectralCrossCheck {
    /// Spectral density `K(lambda) = Im M / (pi (1 + lambda^2))`.
    pub k: CMatrix,
    /// Scattering matrix reassembled from `K` and `Z = -(1+lambda^2)^{-1} M^{-1}`.
    pub s_alt: ScatteringSample,
    /// `||s_alt - s||` on the common fiber basis.
    pub discrepancy: f64,
}

/// Recomputes the scattering matrix as
/// `I + 2 pi i (1 + lambda^2)^2 sqrt(K) Z sqrt(K)` with
/// `K = Im M / (pi (1 + lambda^2))` and `Z = -(1 + lambda^2)^{-1} M^{-1}`,
/// and reports the discrepancy against [`scattering_matrix`]. Both routes are
/// compressed with the same fiber basis, so the discrepancy is pure algebra
/// plus roundoff.
pub fn spectral_density_cross_check(
    mval: &CMatrix,
    lambda: f64,
    rtol: f64,
) -> Result<SpectralCrossCheck> {
    let base = scattering_matrix(mval, rtol)?;
    let weight = 1.0 + lambda * lambda;
    let k = im_part(mval) * Complex64::new(1.0 / (std::f64::consts::PI * weight), 0.0);
    if base.rank == 0 {
        return Ok(SpectralCrossCheck {
            k,
            s_alt: ScatteringSample {
                lambda,
                ..base
            },
            discrepancy: 0.0,
        });
    }
    let minv = inverse_with_cond(mval, COND_LIMIT, |cond| Error::SingularWeylValue { cond })?;
    let z = minv * Complex64::new(-1.0 / weight, 0.0);
    let sqk = psd_sqrt(&k, rtol)?;
    let scale = Complex64::new(0.0, 2.0 * std::f64::consts::PI * weight * weight);
    let s_alt_full = (&sqk * z * &sqk) * scale;
    let q = &base.fiber_basis;
    let s_alt = identity(base.rank) + q.adjoint() * s_alt_full * q;
    let discrepancy = fro_norm(&(&s_alt - &base.s));
    let unitarity_defect = defect_unitary(&s_alt)?;
    Ok(SpectralCrossCheck {
        k,
        s_alt: ScatteringSample {
            lambda,
            rank: base.rank,
            fiber_basis: base.fiber_basis.clone(),
            s: s_alt,
            unitarity_defect,
            err_estimate: 0.0,
            status: SampleStatus::Ok,
        },
        discrepancy,
    })
}

/// Sweeps a lambda grid: boundary value, then fiber scattering matrix.
/// Poles and singular Weyl values become flagged rows, not failures.
pub fn scattering_sweep(
    sampler: &WeylSampler,
    grid: &[f64],
    sched: &BoundarySchedule,
    rtol: f64,
) -> Result<Vec<ScatteringSample>> {
    let dim = sampler.dim();
    grid.iter()
        .map(|&lambda| {
            let (mval, err) = match boundary_limit(sampler, lambda, sched) {
                Ok(v) => v,
                Err(Error::NoConvergence { .. }) => {
                    return Ok(ScatteringSample::failed(lambda, dim, SampleStatus::NoConvergence))
                }
                Err(e) => return Err(e),
            };
            match scattering_matrix(&mval, rtol) {
                Ok(mut sample) => {
                    sample.lambda = lambda;
                    sample.err_estimate = err;
                    Ok(sample)
                }
                Err(Error::SingularWeylValue { .. }) => Ok(ScatteringSample::failed(
                    lambda,
                    dim,
                    SampleStatus::SingularWeylValue,
                )),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    fn scalar(x: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, x)
    }

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn scalar_constant_model() {
        let s = scattering_matrix(&scalar(Complex64::new(0.0, 1.0)), DEFAULT_RTOL).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.s[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!(s.unitarity_defect < 1e-14);
    }

    #[test]
    fn uniform_model_at_half() {
        // boundary value -ln 3 + i pi
        let m = scalar(Complex64::new(-(3.0f64.ln()), PI));
        let s = scattering_matrix(&m, DEFAULT_RTOL).unwrap();
        let expect = Complex64::new(1.0, 0.0)
            - Complex64::new(0.0, 2.0 * PI) / Complex64::new(-(3.0f64.ln()), PI);
        assert!((s.s[(0, 0)] - expect).norm() < 1e-14);
        assert!((s.s[(0, 0)].re + 0.7821).abs() < 5e-5);
        assert!((s.s[(0, 0)].im - 0.6232).abs() < 5e-5);
        assert!((s.s[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn real_boundary_value_gives_rank_zero() {
        // atomic model at lambda = 1: M = -1
        let s = scattering_matrix(&scalar(Complex64::new(-1.0, 0.0)), DEFAULT_RTOL).unwrap();
        assert_eq!(s.rank, 0);
        assert_eq!(s.s.nrows(), 0);
    }

    #[test]
    fn nonsimple_extension_blocks() {
        let base = scattering_matrix(&scalar(Complex64::new(0.0, 1.0)), DEFAULT_RTOL).unwrap();
        let ext = assemble_nonsimple(&base, 2);
        assert_eq!(ext.nrows(), 3);
        assert!((ext[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((ext[(1, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(defect_unitary(&ext).unwrap() < 1e-14);

        let empty = scattering_matrix(&scalar(Complex64::new(2.0, 0.0)), DEFAULT_RTOL).unwrap();
        let id3 = assemble_nonsimple(&empty, 3);
        assert!(fro_norm(&(id3 - identity(3))) < 1e-15);
    }

    #[test]
    fn coupled_scalar_values() {
        let d = DissipativeMatrix::minus_i_identity(1);
        let s = coupled_scattering(&scalar(Complex64::new(0.0, PI)), &d).unwrap();
        assert!((s[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let s2 = coupled_scattering(&scalar(Complex64::new(0.0, 1.0)), &d).unwrap();
        assert!((s2[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn coupled_scalar_multiple_of_identity() {
        // M - D = 2i I at any size gives -I
        let n = 3;
        let d = DissipativeMatrix::minus_i_identity(n);
        let m = identity(n) * Complex64::new(0.0, 1.0);
        let s = coupled_scattering(&m, &d).unwrap();
        assert!(fro_norm(&(s + identity(n))) < 1e-13);
    }

    #[test]
    fn coupled_blocks_scalar_case() {
        let d = DissipativeMatrix::minus_i_identity(1);
        let m = scalar(Complex64::new(0.0, PI));
        let blocks = coupled_blocks(&m, &d, DEFAULT_RTOL).unwrap();
        assert_eq!(blocks.rank, 1);
        let denom = PI + 1.0;
        assert!((blocks.s11[(0, 0)] - Complex64::new(0.0, PI / denom)).norm() < 1e-13);
        assert!((blocks.s12[(0, 0)] - Complex64::new(0.0, PI.sqrt() / denom)).norm() < 1e-13);
        assert!((blocks.s21[(0, 0)] - Complex64::new(0.0, PI.sqrt() / denom)).norm() < 1e-13);
        assert!((blocks.s22[(0, 0)] - Complex64::new(0.0, 1.0 / denom)).norm() < 1e-13);
        let expect = from_rows(
            2,
            2,
            &[
                ((1.0 - PI) / denom, 0.0),
                (-2.0 * PI.sqrt() / denom, 0.0),
                (-2.0 * PI.sqrt() / denom, 0.0),
                ((PI - 1.0) / denom, 0.0),
            ],
        );
        assert!(fro_norm(&(&blocks.full - &expect)) < 1e-13);
        assert!(defect_unitary(&blocks.full).unwrap() < 1e-10);
    }

    #[test]
    fn degenerate_fiber_blocks_reduce_to_channel() {
        let d = DissipativeMatrix::minus_i_identity(1);
        let m = scalar(Complex64::new(2.0, 0.0)); // Im M = 0
        let blocks = coupled_blocks(&m, &d, DEFAULT_RTOL).unwrap();
        assert_eq!(blocks.rank, 0);
        let lp = lax_phillips(&m, &d).unwrap();
        assert!(fro_norm(&(&blocks.full - &lp)) < 1e-14);
    }

    #[test]
    fn lax_phillips_scalar_values() {
        let d = DissipativeMatrix::minus_i_identity(1);
        let lp = lax_phillips(&scalar(Complex64::new(0.0, PI)), &d).unwrap();
        assert!((lp[(0, 0)].re - (PI - 1.0) / (PI + 1.0)).abs() < 1e-14);
        assert!((lp[(0, 0)].re - 0.5171).abs() < 5e-5);
        let zero = lax_phillips(&scalar(Complex64::new(0.0, 1.0)), &d).unwrap();
        assert!(zero[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn lax_phillips_equals_cayley_route() {
        // with D = -iI: I + 2i (D - M)^{-1} = I - 2i (M + i)^{-1}
        let m = from_rows(
            2,
            2,
            &[(0.3, 1.0), (0.1, 0.2), (0.1, -0.2), (-0.4, 2.0)],
        );
        let d = DissipativeMatrix::minus_i_identity(2);
        let lp = lax_phillips(&m, &d).unwrap();
        let shifted = &m + identity(2) * Complex64::new(0.0, 1.0);
        let direct = identity(2)
            - inverse_with_cond(&shifted, 1e12, |cond| Error::Singular { cond }).unwrap()
                * Complex64::new(0.0, 2.0);
        assert!(fro_norm(&(lp - direct)) < 1e-13);
    }

    #[test]
    fn cross_check_scalar_models() {
        let r = spectral_density_cross_check(&scalar(Complex64::new(0.0, 1.0)), 0.0, DEFAULT_RTOL)
            .unwrap();
        assert!((r.k[(0, 0)].re - 1.0 / PI).abs() < 1e-15);
        assert!((r.s_alt.s[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-13);
        assert!(r.discrepancy < 1e-13);

        let r2 = spectral_density_cross_check(&scalar(Complex64::new(0.0, PI)), 0.0, DEFAULT_RTOL)
            .unwrap();
        assert!((r2.k[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(r2.discrepancy < 1e-12);

        let r3 = spectral_density_cross_check(&scalar(Complex64::new(2.0, 0.0)), 0.0, DEFAULT_RTOL)
            .unwrap();
        assert_eq!(r3.discrepancy, 0.0);
    }

    #[test]
    fn dissipative_constructor_rejects_selfadjoint() {
        let a = from_rows(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        assert!(matches!(
            DissipativeMatrix::new(a),
            Err(Error::NotDissipative { .. })
        ));
        // negative semidefinite but not definite
        let b = from_rows(2, 2, &[(0.0, -1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(
            DissipativeMatrix::new(b),
            Err(Error::NotDissipative { .. })
        ));
    }

    #[test]
    fn sweep_flags_pole_rows() {
        use crate::herglotz::{Atom, NevanlinnaMeasure};
        let m = NevanlinnaMeasure::atomic(1, vec![Atom::scalar(0.0, 1.0)]).unwrap();
        let sampler = WeylSampler::from_measure(m);
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let rows =
            scattering_sweep(&sampler, &grid, &BoundarySchedule::default(), DEFAULT_RTOL).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[2].status, SampleStatus::NoConvergence);
        assert!(rows.iter().filter(|r| r.status == SampleStatus::Ok).count() >= 4);
        for r in rows.iter().filter(|r| r.status == SampleStatus::Ok) {
            assert_eq!(r.rank, 0, "atomic model has trivial fibers, got {:?}", r);
        }
    }
}
