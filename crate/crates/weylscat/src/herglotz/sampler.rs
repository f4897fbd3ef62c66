//! Evaluation of matrix Herglotz functions off the real axis.
//!
//! A [`WeylSampler`] is either a closed-form evaluator defined on the upper
//! half-plane (extended below by the reflection `M(conj eta) = M(eta)*`) or a
//! measure-backed evaluator that integrates the Cauchy kernel against a
//! [`NevanlinnaMeasure`].

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{fro_norm, herm_eigh, im_part, CMatrix};
use crate::quad::adaptive_gk15;

use super::measure::{cauchy_kernel, NevanlinnaMeasure};

type ClosedFormFn = dyn Fn(Complex64) -> Result<CMatrix> + Send + Sync;

#[derive(Clone)]
enum SamplerKind {
    ClosedForm(Arc<ClosedFormFn>),
    MeasureBacked(Arc<NevanlinnaMeasure>),
}

/// Evaluator `eta -> M(eta)` defined for `Im eta != 0`.
#[derive(Clone)]
pub struct WeylSampler {
    dim: usize,
    kind: SamplerKind,
}

impl std::fmt::Debug for WeylSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            SamplerKind::ClosedForm(_) => "closed-form",
            SamplerKind::MeasureBacked(_) => "measure-backed",
        };
        write!(f, "WeylSampler(dim={}, {kind})", self.dim)
    }
}

impl WeylSampler {
    /// Wraps a closed-form evaluator defined on the open upper half-plane.
    /// Values in the lower half-plane come from the reflection
    /// `M(eta) = M(conj eta)*`, so the symmetry holds by construction.
    pub fn closed_form(
        dim: usize,
        f: impl Fn(Complex64) -> Result<CMatrix> + Send + Sync + 'static,
    ) -> Self {
        WeylSampler {
            dim,
            kind: SamplerKind::ClosedForm(Arc::new(f)),
        }
    }

    pub fn from_measure(measure: NevanlinnaMeasure) -> Self {
        WeylSampler {
            dim: measure.dim(),
            kind: SamplerKind::MeasureBacked(Arc::new(measure)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The backing measure, when there is one.
    pub fn measure(&self) -> Option<&NevanlinnaMeasure> {
        match &self.kind {
            SamplerKind::MeasureBacked(m) => Some(m),
            SamplerKind::ClosedForm(_) => None,
        }
    }

    pub fn eval(&self, eta: Complex64) -> Result<CMatrix> {
        if eta.im == 0.0 || !eta.is_finite() {
            return Err(Error::RealAxisEvaluation { eta });
        }
        match &self.kind {
            SamplerKind::ClosedForm(f) => {
                if eta.im > 0.0 {
                    f(eta)
                } else {
                    Ok(f(eta.conj())?.adjoint())
                }
            }
            SamplerKind::MeasureBacked(m) => eval_weyl(m, eta),
        }
    }
}

fn piece_breakpoints(kinks: &[f64], singular_points: &[Complex64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = kinks.to_vec();
    for z in singular_points {
        let w = z.im.abs();
        cuts.push(z.re);
        cuts.push(z.re - w);
        cuts.push(z.re + w);
        cuts.push(z.re - 8.0 * w);
        cuts.push(z.re + 8.0 * w);
    }
    cuts
}

fn piece_kinks(piece: &super::measure::DensityPiece) -> Vec<f64> {
    use super::measure::DensityKind;
    match &piece.kind {
        DensityKind::Table { nodes, .. } => nodes.clone(),
        DensityKind::Lorentzian { pole, .. } => {
            vec![pole.re - pole.im, pole.re, pole.re + pole.im]
        }
        _ => Vec::new(),
    }
}

/// Evaluates the integral representation of a measure model at `eta`:
/// `alpha + sum_j kernel(t_j) Gamma_j + int kernel(t) rho(t) dt` with the
/// kernel `1/(t - eta) - t/(1 + t^2)`. Atom sums and tail corrections are
/// exact; bounded density pieces go through adaptive quadrature with a
/// relative target of 1e-9.
pub fn eval_weyl(model: &NevanlinnaMeasure, eta: Complex64) -> Result<CMatrix> {
    if eta.im == 0.0 || !eta.is_finite() {
        return Err(Error::RealAxisEvaluation { eta });
    }
    let mut acc = model.alpha().clone();
    acc += model.atom_cauchy(eta);
    acc += model.tail_cauchy(eta);
    for piece in model.pieces() {
        let f = |t: f64| piece.eval(t) * cauchy_kernel(t, eta);
        let cuts = piece_breakpoints(&piece_kinks(piece), &[eta]);
        let r = adaptive_gk15(&f, piece.a, piece.b, &cuts, 1e-9, 1e-13, 30_000)?;
        acc += r.value;
    }
    Ok(acc)
}

/// Gram matrix of the defect-space map: `int dSigma(t) / ((t - conj(mu))(t - lambda))`.
///
/// With `lambda = mu` this reduces to `Im M(lambda) / Im lambda`.
pub fn gamma_gram(model: &NevanlinnaMeasure, lambda: Complex64, mu: Complex64) -> Result<CMatrix> {
    if lambda.im == 0.0 || !lambda.is_finite() {
        return Err(Error::RealAxisEvaluation { eta: lambda });
    }
    if mu.im == 0.0 || !mu.is_finite() {
        return Err(Error::RealAxisEvaluation { eta: mu });
    }
    let z1 = mu.conj();
    let z2 = lambda;
    let mut acc = model.atom_gram(z1, z2);
    acc += model.tail_gram(z1, z2);
    for piece in model.pieces() {
        let f = |t: f64| {
            let kernel = Complex64::new(1.0, 0.0)
                / ((Complex64::new(t, 0.0) - z1) * (Complex64::new(t, 0.0) - z2));
            piece.eval(t) * kernel
        };
        let cuts = piece_breakpoints(&piece_kinks(piece), &[z1, z2]);
        let r = adaptive_gk15(&f, piece.a, piece.b, &cuts, 1e-9, 1e-13, 30_000)?;
        acc += r.value;
    }
    Ok(acc)
}

/// One grid point of a Herglotz property check.
#[derive(Debug, Clone)]
pub struct HerglotzRow {
    pub eta: Complex64,
    /// `max(0, -lambda_min(Im M(eta)))`.
    pub psd_defect: f64,
    /// `|| M(conj eta) - M(eta)* ||_F`.
    pub symmetry_defect: f64,
}

/// Grid report of PSD and symmetry defects.
#[derive(Debug, Clone)]
pub struct HerglotzReport {
    pub rows: Vec<HerglotzRow>,
    pub tol: f64,
}

impl HerglotzReport {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.psd_defect <= self.tol && r.symmetry_defect <= self.tol)
    }

    pub fn max_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.psd_defect.max(r.symmetry_defect))
            .fold(0.0, f64::max)
    }
}

/// Checks `Im M(eta) >= 0` and `M(conj eta) = M(eta)*` on a grid in the upper
/// half-plane. Failures are recorded in the report, not raised. The verdict
/// is of course only about the sampled grid.
pub fn verify_herglotz(sampler: &WeylSampler, grid: &[Complex64]) -> Result<HerglotzReport> {
    let mut rows = Vec::with_capacity(grid.len());
    for &eta in grid {
        if eta.im <= 0.0 {
            return Err(Error::BadParameters {
                reason: format!("herglotz check grid point {eta} not in the upper half-plane"),
            });
        }
        let m = sampler.eval(eta)?;
        let m_reflected = sampler.eval(eta.conj())?;
        let symmetry_defect = fro_norm(&(m_reflected - m.adjoint()));
        let im = im_part(&m);
        let eig = herm_eigh(&im)?;
        let psd_defect = (-eig.eigenvalues.first().copied().unwrap_or(0.0)).max(0.0);
        rows.push(HerglotzRow {
            eta,
            psd_defect,
            symmetry_defect,
        });
    }
    Ok(HerglotzReport { rows, tol: 1e-8 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herglotz::measure::{Atom, DensityPiece};
    use crate::linalg::from_rows;

    fn scalar(x: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, x)
    }

    fn uniform_measure() -> NevanlinnaMeasure {
        NevanlinnaMeasure::new(
            1,
            scalar(Complex64::new(0.0, 0.0)),
            vec![],
            vec![DensityPiece::constant(-1.0, 1.0, scalar(Complex64::new(1.0, 0.0)))],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn single_atom_at_zero() {
        let m = NevanlinnaMeasure::atomic(1, vec![Atom::scalar(0.0, 1.0)]).unwrap();
        let v = eval_weyl(&m, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn uniform_density_at_i() {
        let m = uniform_measure();
        let v = eval_weyl(&m, Complex64::new(0.0, 1.0)).unwrap();
        let expect = Complex64::new(0.0, std::f64::consts::FRAC_PI_2);
        assert!((v[(0, 0)] - expect).norm() < 1e-10, "{v}");
    }

    #[test]
    fn constant_density_on_line_is_i_beta() {
        // density beta/pi as a truncated piece plus constant tails
        let beta = 2.5;
        let c = scalar(Complex64::new(beta / std::f64::consts::PI, 0.0));
        let m = NevanlinnaMeasure::new(
            1,
            scalar(Complex64::new(0.0, 0.0)),
            vec![],
            vec![DensityPiece::constant(-1e4, 1e4, c.clone())],
            vec![
                super::super::measure::Tail::ConstantLeft {
                    edge: -1e4,
                    value: c.clone(),
                },
                super::super::measure::Tail::ConstantRight { edge: 1e4, value: c },
            ],
        )
        .unwrap();
        let v = eval_weyl(&m, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v[(0, 0)] - Complex64::new(0.0, beta)).norm() < 1e-6);
    }

    #[test]
    fn rejects_real_axis() {
        let m = uniform_measure();
        assert!(matches!(
            eval_weyl(&m, Complex64::new(0.5, 0.0)),
            Err(Error::RealAxisEvaluation { .. })
        ));
    }

    #[test]
    fn gram_uniform_at_i_is_im_m() {
        let m = uniform_measure();
        let eta = Complex64::new(0.0, 1.0);
        let g = gamma_gram(&m, eta, eta).unwrap();
        assert!((g[(0, 0)] - Complex64::new(std::f64::consts::FRAC_PI_2, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn gram_atom_closed_form() {
        let m = NevanlinnaMeasure::atomic(1, vec![Atom::scalar(0.0, 1.0)]).unwrap();
        let g = gamma_gram(&m, Complex64::new(0.0, 2.0), Complex64::new(0.0, 1.0)).unwrap();
        assert!((g[(0, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn herglotz_report_constant_model() {
        let s = WeylSampler::closed_form(1, |_| Ok(scalar(Complex64::new(0.0, 1.0))));
        let grid = vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.5)];
        let report = verify_herglotz(&s, &grid).unwrap();
        assert!(report.passed());
        assert_eq!(report.max_defect(), 0.0);
    }

    #[test]
    fn herglotz_detects_corruption() {
        // negated atom weight: build via closed form to dodge construction checks
        let s = WeylSampler::closed_form(1, |eta| {
            Ok(scalar(-(Complex64::new(1.0, 0.0) / (Complex64::new(0.0, 0.0) - eta))))
        });
        let grid = vec![Complex64::new(0.3, 1.0)];
        let report = verify_herglotz(&s, &grid).unwrap();
        assert!(!report.passed());
        assert!(report.rows[0].psd_defect > 0.0);
    }

    #[test]
    fn measure_backed_symmetry_exact() {
        let m = uniform_measure();
        let s = WeylSampler::from_measure(m);
        let eta = Complex64::new(0.4, 0.8);
        let up = s.eval(eta).unwrap();
        let down = s.eval(eta.conj()).unwrap();
        assert!(fro_norm(&(down - up.adjoint())) < 1e-12);
    }

    #[test]
    fn matrix_valued_measure() {
        // 2x2 with one atom and a constant density block
        let gamma = from_rows(2, 2, &[(1.0, 0.0), (0.5, 0.0), (0.5, 0.0), (1.0, 0.0)]);
        let dens = from_rows(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        let m = NevanlinnaMeasure::new(
            2,
            CMatrix::zeros(2, 2),
            vec![Atom::new(0.5, gamma.clone())],
            vec![DensityPiece::constant(-1.0, 1.0, dens)],
            vec![],
        )
        .unwrap();
        let eta = Complex64::new(0.1, 0.9);
        let v = eval_weyl(&m, eta).unwrap();
        // atom part is exact
        let kernel = cauchy_kernel(0.5, eta);
        let atom_part = gamma * kernel;
        let diag = (Complex64::new(1.0, 0.0) - eta).ln() - (Complex64::new(-1.0, 0.0) - eta).ln();
        assert!((v[(0, 1)] - atom_part[(0, 1)]).norm() < 1e-10);
        assert!((v[(0, 0)] - atom_part[(0, 0)] - diag).norm() < 1e-9);
        assert!((v[(1, 1)] - atom_part[(1, 1)] - diag * 2.0).norm() < 1e-9);
    }
}
