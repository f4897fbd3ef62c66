//! Dense complex-matrix primitives shared by every other module: Hermitian
//! eigendecomposition, PSD square roots, rank-revealing range bases,
//! condition-checked solves, and unitarity/contractivity defects.
//!
//! All matrices here are small (n up to a few dozen), so everything is done
//! with dense `nalgebra` decompositions. Eigenvector ordering and phase are
//! normalized so that repeated runs produce identical bases: columns are
//! sorted by eigenvalue and each column is rotated so its largest-modulus
//! entry is real and positive.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the carrier type for every matrix-valued quantity.
pub type CMatrix = DMatrix<Complex64>;

/// Default relative tolerance for rank decisions and PSD clamping.
///
/// Boundary values extrapolated from the upper half-plane carry errors well
/// above machine precision, so the rank cut sits at 1e-10 relative to the
/// largest eigenvalue: below every defect threshold used by callers and above
/// accumulated roundoff in 2n x 2n workloads.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Hermitian eigendecomposition with ascending eigenvalues and a
/// phase-normalized unitary eigenvector matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the corresponding eigenvectors.
    pub eigenvectors: CMatrix,
}

/// Checks that every entry is finite.
pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::BadParameters {
            reason: "matrix contains NaN or infinite entries".into(),
        })
    }
}

fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Frobenius norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian part (M + M*)/2.
pub fn herm_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Hermitian imaginary part (M - M*)/(2i); this is the operator `Im M`,
/// not the entrywise imaginary part.
pub fn im_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

/// Hermitian real part (M + M*)/2, alias of [`herm_part`] kept for symmetry
/// with [`im_part`].
pub fn re_part(m: &CMatrix) -> CMatrix {
    herm_part(m)
}

/// Identity matrix of size n.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Relative Hermitian defect ||M - M*||_F / ||M||_F (absolute when M ~ 0).
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let scale = fro_norm(m).max(1e-300);
    fro_norm(&(m - m.adjoint())) / scale
}

fn phase_normalize_columns(v: &mut CMatrix) {
    for c in 0..v.ncols() {
        let mut best = 0usize;
        let mut best_mod = -1.0;
        for r in 0..v.nrows() {
            let m = v[(r, c)].norm();
            if m > best_mod + 1e-15 {
                best_mod = m;
                best = r;
            }
        }
        if best_mod > 0.0 {
            let pivot = v[(best, c)];
            let phase = pivot / pivot.norm();
            for r in 0..v.nrows() {
                v[(r, c)] /= phase;
            }
        }
    }
}

/// Hermitian eigendecomposition.
///
/// The input is symmetrized before decomposition; a relative Hermitian defect
/// above 1e-10 is rejected.
pub fn herm_eigh(h: &CMatrix) -> Result<HermEig> {
    ensure_square(h)?;
    ensure_finite(h)?;
    let defect = hermitian_defect(h);
    if defect > 1e-10 {
        return Err(Error::NotHermitian { defect });
    }
    let hs = herm_part(h);
    let se = hs.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    phase_normalize_columns(&mut eigenvectors);
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

impl HermEig {
    /// Rebuilds V diag(f(d)) V*.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let d = CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(f(self.eigenvalues[r]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-rtol * max|d|, 0)` are clamped to zero (they arise from
/// roundoff in boundary values); anything more negative is rejected.
pub fn psd_sqrt(h: &CMatrix, rtol: f64) -> Result<CMatrix> {
    let eig = herm_eigh(h)?;
    let dmax = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &d| acc.max(d.abs()));
    let floor = -rtol * dmax;
    if let Some(&min_eig) = eig
        .eigenvalues
        .iter()
        .find(|&&d| d < floor && d.abs() > 1e-300)
    {
        return Err(Error::NotPsd { min_eig });
    }
    let result = eig.apply(|d| if d > 0.0 { d.sqrt() } else { 0.0 });
    Ok(herm_part(&result))
}

/// Orthonormal basis of the range of a Hermitian PSD matrix.
///
/// Returns `(rank, Q)` where the columns of Q span the eigenspaces with
/// eigenvalue above `rtol * max(d)`. Ordering is deterministic: descending
/// eigenvalue, each column phase-rotated so its largest-modulus entry is real
/// positive.
pub fn range_basis(h: &CMatrix, rtol: f64) -> Result<(usize, CMatrix)> {
    range_basis_with_floor(h, rtol, 0.0)
}

/// [`range_basis`] with an additional absolute eigenvalue floor. Callers that
/// compare against an external scale (e.g. the norm of a full Weyl value) use
/// the floor to declare a near-zero matrix rank 0 instead of chasing noise.
pub fn range_basis_with_floor(h: &CMatrix, rtol: f64, abs_floor: f64) -> Result<(usize, CMatrix)> {
    let eig = herm_eigh(h)?;
    let dmax = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &d| acc.max(d.abs()));
    if eig
        .eigenvalues
        .iter()
        .any(|&d| d < -(rtol * dmax).max(abs_floor) && d.abs() > 1e-300)
    {
        return Err(Error::NotPsd {
            min_eig: *eig
                .eigenvalues
                .first()
                .expect("nonempty spectrum"),
        });
    }
    let threshold = (rtol * dmax).max(abs_floor);
    let n = h.nrows();
    // Descending order: reverse of the ascending decomposition.
    let mut kept: Vec<usize> = (0..n)
        .rev()
        .filter(|&k| eig.eigenvalues[k] > threshold)
        .collect();
    kept.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let rank = kept.len();
    let mut q = CMatrix::zeros(n, rank);
    for (dst, &src) in kept.iter().enumerate() {
        q.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((rank, q))
}

/// Nearest PSD matrix in the spectral sense: Hermitian part with negative
/// eigenvalues clamped to zero.
pub fn psd_project(h: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eigh(&herm_part(h))?;
    Ok(herm_part(&eig.apply(|d| d.max(0.0))))
}

/// ||U*U - I||_F.
pub fn defect_unitary(u: &CMatrix) -> Result<f64> {
    ensure_square(u)?;
    let n = u.ncols();
    Ok(fro_norm(&(u.adjoint() * u - identity(n))))
}

/// max(0, largest eigenvalue of T*T - I); zero exactly when T is a contraction.
pub fn defect_contraction(t: &CMatrix) -> Result<f64> {
    ensure_square(t)?;
    let n = t.ncols();
    let g = t.adjoint() * t - identity(n);
    let eig = herm_eigh(&g)?;
    Ok(eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0))
}

/// Operator (spectral) norm via the Gram matrix.
pub fn op_norm(m: &CMatrix) -> Result<f64> {
    let g = m.adjoint() * m;
    let eig = herm_eigh(&g)?;
    Ok(eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// LU solve M X = RHS with a Frobenius condition estimate.
///
/// Fails with the supplied error constructor when the condition estimate
/// exceeds `cond_limit` (1e12 is the conventional cutoff for boundary
/// values at spectral points).
pub fn solve_with_cond(
    m: &CMatrix,
    rhs: &CMatrix,
    cond_limit: f64,
    err: impl Fn(f64) -> Error,
) -> Result<CMatrix> {
    ensure_square(m)?;
    let lu = m.clone().lu();
    let inv = match lu.try_inverse() {
        Some(inv) => inv,
        None => return Err(err(f64::INFINITY)),
    };
    let cond = fro_norm(m) * fro_norm(&inv);
    if !cond.is_finite() || cond > cond_limit {
        return Err(err(cond));
    }
    Ok(inv * rhs)
}

/// Condition-checked inverse.
pub fn inverse_with_cond(m: &CMatrix, cond_limit: f64, err: impl Fn(f64) -> Error) -> Result<CMatrix> {
    let n = m.nrows();
    solve_with_cond(m, &identity(n), cond_limit, err)
}

/// Builds a matrix from a row-major slice of (re, im) pairs.
pub fn from_rows(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMatrix {
    assert_eq!(rows * cols, data.len());
    CMatrix::from_fn(rows, cols, |r, c| {
        let (re, im) = data[r * cols + c];
        Complex64::new(re, im)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn cm(data: &[(f64, f64)], n: usize) -> CMatrix {
        from_rows(n, n, data)
    }

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        herm_part(&a)
    }

    #[test]
    fn eigh_zero_matrix() {
        let h = cm(&[(0.0, 0.0)], 1);
        let e = herm_eigh(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0]);
        assert_eq!(e.eigenvectors[(0, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn eigh_diagonal() {
        let h = cm(&[(4.0, 0.0), (0.0, 0.0), (0.0, 0.0), (9.0, 0.0)], 2);
        let e = herm_eigh(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![4.0, 9.0]);
        assert!(fro_norm(&(e.eigenvectors.clone() - identity(2))) < 1e-14);
    }

    #[test]
    fn eigh_reconstruction_random() {
        let h = random_hermitian(4, 7);
        let e = herm_eigh(&h).unwrap();
        let recon = e.apply(|d| d);
        assert!(fro_norm(&(recon - &h)) < 1e-12 * fro_norm(&h).max(1.0));
        assert!(defect_unitary(&e.eigenvectors).unwrap() < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let h = cm(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)], 2);
        assert!(matches!(herm_eigh(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_rejects_non_square() {
        let h = CMatrix::zeros(2, 3);
        assert!(matches!(herm_eigh(&h), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn sqrt_diagonal() {
        let h = cm(&[(4.0, 0.0), (0.0, 0.0), (0.0, 0.0), (9.0, 0.0)], 2);
        let s = psd_sqrt(&h, DEFAULT_RTOL).unwrap();
        let expect = cm(&[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (3.0, 0.0)], 2);
        assert!(fro_norm(&(s - expect)) < 1e-14);
    }

    #[test]
    fn sqrt_zero() {
        let h = cm(&[(0.0, 0.0)], 1);
        let s = psd_sqrt(&h, DEFAULT_RTOL).unwrap();
        assert_eq!(s[(0, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sqrt_squares_back() {
        let h = cm(&[(2.0, 0.0), (1.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 2);
        let s = psd_sqrt(&h, DEFAULT_RTOL).unwrap();
        assert!(fro_norm(&(&s * &s - &h)) < 1e-10 * fro_norm(&h));
    }

    #[test]
    fn sqrt_rejects_negative() {
        let h = cm(&[(-1.0, 0.0)], 1);
        assert!(matches!(psd_sqrt(&h, DEFAULT_RTOL), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn range_zero_operator() {
        let h = CMatrix::zeros(2, 2);
        let (rank, q) = range_basis(&h, DEFAULT_RTOL).unwrap();
        assert_eq!(rank, 0);
        assert_eq!(q.ncols(), 0);
    }

    #[test]
    fn range_scalar_pi() {
        let h = cm(&[(std::f64::consts::PI, 0.0)], 1);
        let (rank, q) = range_basis(&h, DEFAULT_RTOL).unwrap();
        assert_eq!(rank, 1);
        assert!((q[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn range_drops_below_threshold() {
        let h = cm(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1e-16, 0.0)], 2);
        let (rank, _) = range_basis(&h, 1e-10).unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn range_captures_projector() {
        let h = random_hermitian(3, 3);
        let hsq = &h * &h; // PSD
        let (_, q) = range_basis(&hsq, DEFAULT_RTOL).unwrap();
        let defect = fro_norm(&(&q * q.adjoint() * &hsq - &hsq));
        assert!(defect < 1e-10 * fro_norm(&hsq).max(1.0));
    }

    #[test]
    fn unitary_defects() {
        assert_eq!(defect_unitary(&identity(3)).unwrap(), 0.0);
        let m = cm(&[(-1.0, 0.0)], 1);
        assert!(defect_unitary(&m).unwrap() < 1e-15);
    }

    #[test]
    fn contraction_defects() {
        let t = cm(&[(0.5171, 0.0)], 1);
        assert_eq!(defect_contraction(&t).unwrap(), 0.0);
        let t2 = cm(&[(1.5, 0.0)], 1);
        assert!(defect_contraction(&t2).unwrap() > 1.0);
    }

    #[test]
    fn solve_detects_singular() {
        let m = cm(&[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 0.0)], 2);
        let r = solve_with_cond(&m, &identity(2), 1e12, |cond| Error::Singular { cond });
        assert!(matches!(r, Err(Error::Singular { .. })));
    }
}
