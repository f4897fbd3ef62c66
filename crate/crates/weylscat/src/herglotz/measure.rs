//! Measure data `(alpha, Sigma)` of a matrix Herglotz function.
//!
//! A function with positive semidefinite imaginary part on the upper
//! half-plane is represented here by a Hermitian offset `alpha` together with
//! a matrix measure `Sigma` split into three computable parts:
//!
//!   * point masses (`Atom`): positions with Hermitian PSD weights,
//!   * bounded density pieces (`DensityPiece`): an interval `[a, b]` with a
//!     PSD matrix density (constant, polynomial, tabulated piecewise-linear,
//!     or a Lorentzian bump), integrated by adaptive quadrature,
//!   * tail corrections (`Tail`): closed-form contributions of unbounded
//!     supports (constant density beyond an edge, or the remainder of a
//!     full-line Lorentzian outside a bounded window).
//!
//! The value of the represented function at `eta` off the real axis is
//!
//!   `alpha + sum_j (1/(t_j - eta) - t_j/(1 + t_j^2)) Gamma_j
//!          + int (1/(t - eta) - t/(1 + t^2)) rho(t) dt`,
//!
//! assembled in [`super::sampler::eval_weyl`]. This module owns the data,
//! its validation, the JSON file format, and every closed-form integral
//! (Cauchy transforms, Gram kernels, `(1+t^2)^{-1}` moments) of the atoms and
//! tails. Only the bounded pieces ever meet the quadrature code.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, fro_norm, herm_eigh, herm_part, hermitian_defect, CMatrix};
use crate::quad::adaptive_gk15;

const VALIDATE_TOL: f64 = 1e-8;

/// Cauchy kernel with the standard normalization term.
pub fn cauchy_kernel(t: f64, eta: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) / (Complex64::new(t, 0.0) - eta) - Complex64::new(t / (1.0 + t * t), 0.0)
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `int_a^b dt/(t - z)` for `z` off the segment, as a difference of
/// principal logarithms (the imaginary part of `t - z` has constant sign
/// along the path, so no branch cut is crossed).
fn log_segment(a: f64, b: f64, z: Complex64) -> Complex64 {
    (Complex64::new(b, 0.0) - z).ln() - (Complex64::new(a, 0.0) - z).ln()
}

/// A point mass of the measure.
#[derive(Debug, Clone)]
pub struct Atom {
    pub position: f64,
    /// Hermitian PSD weight.
    pub weight: CMatrix,
}

impl Atom {
    pub fn new(position: f64, weight: CMatrix) -> Self {
        Atom { position, weight }
    }

    /// Scalar convenience constructor (1x1 weight).
    pub fn scalar(position: f64, weight: f64) -> Self {
        Atom {
            position,
            weight: CMatrix::from_element(1, 1, Complex64::new(weight, 0.0)),
        }
    }
}

/// Pointwise definition of a density on a bounded interval.
#[derive(Debug, Clone)]
pub enum DensityKind {
    /// Constant PSD matrix.
    Constant(CMatrix),
    /// `sum_k C_k t^k` with Hermitian coefficients; must be PSD on the interval.
    Poly(Vec<CMatrix>),
    /// Piecewise-linear interpolation of tabulated PSD values.
    Table { nodes: Vec<f64>, values: Vec<CMatrix> },
    /// `weight * (Im q / pi) / |t - q|^2` with the pole `q` in the upper half-plane.
    Lorentzian { pole: Complex64, weight: CMatrix },
}

/// A density piece: `kind` restricted to `[a, b]`.
#[derive(Debug, Clone)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub kind: DensityKind,
}

impl DensityPiece {
    pub fn constant(a: f64, b: f64, value: CMatrix) -> Self {
        DensityPiece {
            a,
            b,
            kind: DensityKind::Constant(value),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DensityKind::Constant(c) => c.nrows(),
            DensityKind::Poly(cs) => cs.first().map(|c| c.nrows()).unwrap_or(0),
            DensityKind::Table { values, .. } => values.first().map(|c| c.nrows()).unwrap_or(0),
            DensityKind::Lorentzian { weight, .. } => weight.nrows(),
        }
    }

    /// Density value at `t` (defined for `t` in `[a, b]`; clamped outside).
    pub fn eval(&self, t: f64) -> CMatrix {
        match &self.kind {
            DensityKind::Constant(c) => c.clone(),
            DensityKind::Poly(cs) => {
                let n = self.dim();
                let mut acc = CMatrix::zeros(n, n);
                let mut power = 1.0;
                for c in cs {
                    acc += c * Complex64::new(power, 0.0);
                    power *= t;
                }
                acc
            }
            DensityKind::Table { nodes, values } => {
                if nodes.len() == 1 || t <= nodes[0] {
                    return values[0].clone();
                }
                if t >= *nodes.last().unwrap() {
                    return values.last().unwrap().clone();
                }
                let idx = match nodes.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(k) => return values[k].clone(),
                    Err(k) => k, // nodes[k-1] < t < nodes[k]
                };
                let (t0, t1) = (nodes[idx - 1], nodes[idx]);
                let w = (t - t0) / (t1 - t0);
                &values[idx - 1] * Complex64::new(1.0 - w, 0.0) + &values[idx] * Complex64::new(w, 0.0)
            }
            DensityKind::Lorentzian { pole, weight } => {
                let b = pole.im;
                let scale = (b / std::f64::consts::PI)
                    / ((t - pole.re) * (t - pole.re) + b * b);
                weight * Complex64::new(scale, 0.0)
            }
        }
    }

    /// Interior points where the integrand may lose smoothness.
    fn kink_points(&self) -> Vec<f64> {
        match &self.kind {
            DensityKind::Table { nodes, .. } => nodes.clone(),
            DensityKind::Lorentzian { pole, .. } => {
                vec![pole.re - pole.im, pole.re, pole.re + pole.im]
            }
            _ => Vec::new(),
        }
    }
}

/// Closed-form handled unbounded part of the measure.
#[derive(Debug, Clone)]
pub enum Tail {
    /// Constant density `value` on `(-inf, edge]`.
    ConstantLeft { edge: f64, value: CMatrix },
    /// Constant density `value` on `[edge, +inf)`.
    ConstantRight { edge: f64, value: CMatrix },
    /// Full-line Lorentzian minus its restriction to `[a, b]` (the bounded
    /// restriction is expected to be present as a [`DensityPiece`]).
    LorentzianBeyond {
        a: f64,
        b: f64,
        pole: Complex64,
        weight: CMatrix,
    },
}

/// `int_R L(t)/(t - z) dt` of a unit Lorentzian with upper pole `q`.
fn lorentz_full_cauchy(q: Complex64, z: Complex64) -> Complex64 {
    let mirror = if z.im > 0.0 { q.conj() } else { q };
    Complex64::new(1.0, 0.0) / (mirror - z)
}

/// `int_a^b L(t)/(t - z) dt` of a unit Lorentzian via partial fractions.
fn lorentz_segment_cauchy(q: Complex64, a: f64, b: f64, z: Complex64) -> Complex64 {
    let qc = q.conj();
    let pref = Complex64::new(q.im / std::f64::consts::PI, 0.0);
    let ca = Complex64::new(1.0, 0.0) / ((z - q) * (z - qc));
    let cb = Complex64::new(1.0, 0.0) / ((q - z) * (q - qc));
    let cc = Complex64::new(1.0, 0.0) / ((qc - z) * (qc - q));
    pref * (ca * log_segment(a, b, z) + cb * log_segment(a, b, q) + cc * log_segment(a, b, qc))
}

/// `int_{-inf}^{x} L(t)/(1+t^2) dt` of a unit Lorentzian (real scalar).
fn lorentz_weighted_cumulative(q: Complex64, x: f64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let poles = [q, q.conj(), i, -i];
    let pref = q.im / std::f64::consts::PI;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &w) in poles.iter().enumerate() {
        let mut coef = Complex64::new(pref, 0.0);
        for (j, &v) in poles.iter().enumerate() {
            if j != k {
                coef /= w - v;
            }
        }
        // sum over antiderivative values minus the t -> -inf limit
        acc += coef * ((Complex64::new(x, 0.0) - w).ln() + i * std::f64::consts::PI * sgn(w.im));
    }
    acc.re.max(0.0)
}

impl Tail {
    fn dim(&self) -> usize {
        match self {
            Tail::ConstantLeft { value, .. } | Tail::ConstantRight { value, .. } => value.nrows(),
            Tail::LorentzianBeyond { weight, .. } => weight.nrows(),
        }
    }

    /// Contribution to the Cauchy integral with the standard normalization.
    pub fn cauchy(&self, eta: Complex64) -> CMatrix {
        match self {
            Tail::ConstantRight { edge, value } => {
                let f_edge = (Complex64::new(*edge, 0.0) - eta).ln()
                    - Complex64::new(0.5 * (1.0 + edge * edge).ln(), 0.0);
                value * (-f_edge)
            }
            Tail::ConstantLeft { edge, value } => {
                let f_edge = (Complex64::new(*edge, 0.0) - eta).ln()
                    - Complex64::new(0.5 * (1.0 + edge * edge).ln(), 0.0);
                let f_minus_inf = Complex64::new(0.0, -std::f64::consts::PI * sgn(eta.im));
                value * (f_edge - f_minus_inf)
            }
            Tail::LorentzianBeyond { a, b, pole, weight } => {
                let i = Complex64::new(0.0, 1.0);
                let full = lorentz_full_cauchy(*pole, eta)
                    - (lorentz_full_cauchy(*pole, i) + lorentz_full_cauchy(*pole, -i))
                        * Complex64::new(0.5, 0.0);
                let central = lorentz_segment_cauchy(*pole, *a, *b, eta)
                    - (lorentz_segment_cauchy(*pole, *a, *b, i)
                        + lorentz_segment_cauchy(*pole, *a, *b, -i))
                        * Complex64::new(0.5, 0.0);
                weight * (full - central)
            }
        }
    }

    /// Contribution to `int dSigma(t) / ((t - z1)(t - z2))`.
    pub fn gram(&self, z1: Complex64, z2: Complex64) -> CMatrix {
        let split = Complex64::new(1.0, 0.0) / (z1 - z2);
        match self {
            Tail::ConstantRight { edge, value } => {
                let diff = (Complex64::new(*edge, 0.0) - z1).ln()
                    - (Complex64::new(*edge, 0.0) - z2).ln();
                value * (-diff * split)
            }
            Tail::ConstantLeft { edge, value } => {
                let diff = (Complex64::new(*edge, 0.0) - z1).ln()
                    - (Complex64::new(*edge, 0.0) - z2).ln();
                let at_minus_inf =
                    Complex64::new(0.0, std::f64::consts::PI * (sgn(z2.im) - sgn(z1.im)));
                value * ((diff - at_minus_inf) * split)
            }
            Tail::LorentzianBeyond { a, b, pole, weight } => {
                let full = lorentz_full_cauchy(*pole, z1) - lorentz_full_cauchy(*pole, z2);
                let central = lorentz_segment_cauchy(*pole, *a, *b, z1)
                    - lorentz_segment_cauchy(*pole, *a, *b, z2);
                weight * ((full - central) * split)
            }
        }
    }

    /// Contribution to `int dSigma(t)/(1 + t^2)`.
    pub fn weighted_mass(&self) -> CMatrix {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Tail::ConstantRight { edge, value } => {
                value * Complex64::new(FRAC_PI_2 - edge.atan(), 0.0)
            }
            Tail::ConstantLeft { edge, value } => {
                value * Complex64::new(edge.atan() + FRAC_PI_2, 0.0)
            }
            Tail::LorentzianBeyond { a, b, pole, weight } => {
                // int_R L(t)/(1+t^2) dt = Im 1/(conj(q) - i)
                let full = (Complex64::new(1.0, 0.0) / (pole.conj() - Complex64::new(0.0, 1.0))).im;
                let central =
                    lorentz_weighted_cumulative(*pole, *b) - lorentz_weighted_cumulative(*pole, *a);
                weight * Complex64::new((full - central).max(0.0), 0.0)
            }
        }
    }

    /// Contribution to `int_{-inf}^{x} dSigma(t)/(1 + t^2)`.
    pub fn weighted_cumulative(&self, x: f64) -> CMatrix {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Tail::ConstantRight { edge, value } => {
                if x <= *edge {
                    CMatrix::zeros(value.nrows(), value.ncols())
                } else {
                    value * Complex64::new(x.atan() - edge.atan(), 0.0)
                }
            }
            Tail::ConstantLeft { edge, value } => {
                value * Complex64::new(x.min(*edge).atan() + FRAC_PI_2, 0.0)
            }
            Tail::LorentzianBeyond { a, b, pole, weight } => {
                let full = lorentz_weighted_cumulative(*pole, x);
                let central = lorentz_weighted_cumulative(*pole, x.clamp(*a, *b))
                    - lorentz_weighted_cumulative(*pole, *a);
                weight * Complex64::new((full - central).max(0.0), 0.0)
            }
        }
    }

    /// Density value at `t` (zero outside the tail's region).
    pub fn density_at(&self, t: f64) -> CMatrix {
        let n = self.dim();
        match self {
            Tail::ConstantRight { edge, value } => {
                if t >= *edge {
                    value.clone()
                } else {
                    CMatrix::zeros(n, n)
                }
            }
            Tail::ConstantLeft { edge, value } => {
                if t <= *edge {
                    value.clone()
                } else {
                    CMatrix::zeros(n, n)
                }
            }
            Tail::LorentzianBeyond { a, b, pole, weight } => {
                if t < *a || t > *b {
                    let s = (pole.im / std::f64::consts::PI)
                        / ((t - pole.re) * (t - pole.re) + pole.im * pole.im);
                    weight * Complex64::new(s, 0.0)
                } else {
                    CMatrix::zeros(n, n)
                }
            }
        }
    }
}

/// Full measure model `(alpha, Sigma)`.
#[derive(Debug, Clone)]
pub struct NevanlinnaMeasure {
    dim: usize,
    alpha: CMatrix,
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
    tails: Vec<Tail>,
}

fn check_psd_matrix(m: &CMatrix, what: &str) -> Result<()> {
    ensure_finite(m)?;
    if hermitian_defect(m) > VALIDATE_TOL {
        return Err(Error::BadParameters {
            reason: format!("{what} is not Hermitian"),
        });
    }
    let eig = herm_eigh(&herm_part(m))?;
    let dmax = eig.eigenvalues.iter().fold(0.0f64, |a, &d| a.max(d.abs()));
    if eig.eigenvalues.iter().any(|&d| d < -VALIDATE_TOL * dmax.max(1e-30)) {
        return Err(Error::BadParameters {
            reason: format!("{what} is not positive semidefinite"),
        });
    }
    Ok(())
}

fn check_lorentz_pole(pole: Complex64) -> Result<()> {
    if !pole.is_finite() || pole.im <= 0.0 {
        return Err(Error::BadParameters {
            reason: "Lorentzian pole must lie in the open upper half-plane".into(),
        });
    }
    if (pole - Complex64::new(0.0, 1.0)).norm() < 1e-6 {
        return Err(Error::BadParameters {
            reason: "Lorentzian pole too close to i (normalization pole)".into(),
        });
    }
    Ok(())
}

impl NevanlinnaMeasure {
    pub fn new(
        dim: usize,
        alpha: CMatrix,
        atoms: Vec<Atom>,
        pieces: Vec<DensityPiece>,
        tails: Vec<Tail>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParameters {
                reason: "dimension must be positive".into(),
            });
        }
        if alpha.nrows() != dim || alpha.ncols() != dim {
            return Err(Error::BadParameters {
                reason: "alpha dimension mismatch".into(),
            });
        }
        ensure_finite(&alpha)?;
        if hermitian_defect(&alpha) > VALIDATE_TOL {
            return Err(Error::BadParameters {
                reason: "alpha is not Hermitian".into(),
            });
        }
        for atom in &atoms {
            if !atom.position.is_finite() {
                return Err(Error::BadParameters {
                    reason: "atom position not finite".into(),
                });
            }
            if atom.weight.nrows() != dim {
                return Err(Error::BadParameters {
                    reason: "atom weight dimension mismatch".into(),
                });
            }
            check_psd_matrix(&atom.weight, "atom weight")?;
        }
        for piece in &pieces {
            if !(piece.a.is_finite() && piece.b.is_finite() && piece.a < piece.b) {
                return Err(Error::BadParameters {
                    reason: format!("bad density interval [{}, {}]", piece.a, piece.b),
                });
            }
            if piece.dim() != dim {
                return Err(Error::BadParameters {
                    reason: "density dimension mismatch".into(),
                });
            }
            match &piece.kind {
                DensityKind::Table { nodes, values } => {
                    if nodes.len() != values.len() || nodes.len() < 2 {
                        return Err(Error::BadParameters {
                            reason: "table needs matching nodes/values with at least 2 entries".into(),
                        });
                    }
                    if nodes.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::BadParameters {
                            reason: "table nodes must be strictly increasing".into(),
                        });
                    }
                    for v in values {
                        check_psd_matrix(v, "table density value")?;
                    }
                }
                DensityKind::Lorentzian { pole, weight } => {
                    check_lorentz_pole(*pole)?;
                    check_psd_matrix(weight, "Lorentzian weight")?;
                }
                _ => {
                    // sample a handful of points
                    for k in 0..=6 {
                        let t = piece.a + (piece.b - piece.a) * (k as f64) / 6.0;
                        check_psd_matrix(&piece.eval(t), "density value")?;
                    }
                }
            }
        }
        for tail in &tails {
            if tail.dim() != dim {
                return Err(Error::BadParameters {
                    reason: "tail dimension mismatch".into(),
                });
            }
            match tail {
                Tail::ConstantLeft { value, .. } | Tail::ConstantRight { value, .. } => {
                    check_psd_matrix(value, "tail density")?
                }
                Tail::LorentzianBeyond { a, b, pole, weight } => {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(Error::BadParameters {
                            reason: "bad Lorentzian tail window".into(),
                        });
                    }
                    check_lorentz_pole(*pole)?;
                    check_psd_matrix(weight, "Lorentzian tail weight")?;
                }
            }
        }
        Ok(NevanlinnaMeasure {
            dim,
            alpha: herm_part(&alpha),
            atoms,
            pieces,
            tails,
        })
    }

    /// Purely atomic measure with zero offset.
    pub fn atomic(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        Self::new(dim, CMatrix::zeros(dim, dim), atoms, Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn alpha(&self) -> &CMatrix {
        &self.alpha
    }
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }
    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    /// Exact sum of the atom contributions to the Cauchy integral.
    pub fn atom_cauchy(&self, eta: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            acc += &atom.weight * cauchy_kernel(atom.position, eta);
        }
        acc
    }

    /// Exact sum of the tail contributions to the Cauchy integral.
    pub fn tail_cauchy(&self, eta: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for tail in &self.tails {
            acc += tail.cauchy(eta);
        }
        acc
    }

    /// Atom contributions to the Gram kernel `1/((t - z1)(t - z2))`.
    pub fn atom_gram(&self, z1: Complex64, z2: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            let t = Complex64::new(atom.position, 0.0);
            acc += &atom.weight * (Complex64::new(1.0, 0.0) / ((t - z1) * (t - z2)));
        }
        acc
    }

    /// Tail contributions to the Gram kernel.
    pub fn tail_gram(&self, z1: Complex64, z2: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for tail in &self.tails {
            acc += tail.gram(z1, z2);
        }
        acc
    }

    /// Density value at `t` (pieces plus tails; atoms excluded).
    pub fn density_at(&self, t: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for piece in &self.pieces {
            if t >= piece.a && t <= piece.b {
                acc += piece.eval(t);
            }
        }
        for tail in &self.tails {
            acc += tail.density_at(t);
        }
        acc
    }

    /// `int dSigma(t)/(1 + t^2)`, the total normalized mass of the measure.
    pub fn weighted_mass(&self) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            acc += &atom.weight
                * Complex64::new(1.0 / (1.0 + atom.position * atom.position), 0.0);
        }
        for piece in &self.pieces {
            let f = |t: f64| piece.eval(t) * Complex64::new(1.0 / (1.0 + t * t), 0.0);
            let r = adaptive_gk15(&f, piece.a, piece.b, &piece.kink_points(), 1e-10, 1e-13, 50_000)?;
            acc += r.value;
        }
        for tail in &self.tails {
            acc += tail.weighted_mass();
        }
        Ok(acc)
    }

    /// `int_{-inf}^{x} dSigma(t)/(1 + t^2)`.
    pub fn weighted_cumulative(&self, x: f64) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            if atom.position <= x {
                acc += &atom.weight
                    * Complex64::new(1.0 / (1.0 + atom.position * atom.position), 0.0);
            }
        }
        for piece in &self.pieces {
            if x > piece.a {
                let hi = x.min(piece.b);
                let f = |t: f64| piece.eval(t) * Complex64::new(1.0 / (1.0 + t * t), 0.0);
                let r = adaptive_gk15(&f, piece.a, hi, &piece.kink_points(), 1e-10, 1e-13, 50_000)?;
                acc += r.value;
            }
        }
        for tail in &self.tails {
            acc += tail.weighted_cumulative(x);
        }
        Ok(acc)
    }

    /// Serializes to the documented JSON model format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeasureRepr::from(self)).expect("measure serialization")
    }

    /// Parses and validates the documented JSON model format.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: MeasureRepr = serde_json::from_str(text).map_err(|e| Error::BadParameters {
            reason: format!("model file parse error: {e}"),
        })?;
        repr.build()
    }
}

// ---------------------------------------------------------------------------
// JSON representation (documented model file format)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixRepr(Vec<Vec<[f64; 2]>>);

impl MatrixRepr {
    fn from_matrix(m: &CMatrix) -> Self {
        MatrixRepr(
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        )
    }

    fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::BadParameters {
                reason: "empty matrix in model file".into(),
            });
        }
        let cols = self.0[0].len();
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::BadParameters {
                reason: "ragged matrix in model file".into(),
            });
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            Complex64::new(self.0[r][c][0], self.0[r][c][1])
        }))
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    t: f64,
    gamma: MatrixRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
enum PieceKindRepr {
    Constant(MatrixRepr),
    Poly(Vec<MatrixRepr>),
    Table {
        nodes: Vec<f64>,
        values: Vec<MatrixRepr>,
    },
    Lorentzian {
        pole: [f64; 2],
        weight: MatrixRepr,
    },
}

#[derive(Serialize, Deserialize)]
struct PieceRepr {
    a: f64,
    b: f64,
    #[serde(flatten)]
    kind: PieceKindRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TailRepr {
    ConstantLeft { edge: f64, value: MatrixRepr },
    ConstantRight { edge: f64, value: MatrixRepr },
    LorentzianBeyond {
        a: f64,
        b: f64,
        pole: [f64; 2],
        weight: MatrixRepr,
    },
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    dim: usize,
    alpha: MatrixRepr,
    #[serde(default)]
    atoms: Vec<AtomRepr>,
    #[serde(default)]
    density: Vec<PieceRepr>,
    #[serde(default)]
    tails: Vec<TailRepr>,
}

impl From<&NevanlinnaMeasure> for MeasureRepr {
    fn from(m: &NevanlinnaMeasure) -> Self {
        MeasureRepr {
            dim: m.dim,
            alpha: MatrixRepr::from_matrix(&m.alpha),
            atoms: m
                .atoms
                .iter()
                .map(|a| AtomRepr {
                    t: a.position,
                    gamma: MatrixRepr::from_matrix(&a.weight),
                })
                .collect(),
            density: m
                .pieces
                .iter()
                .map(|p| PieceRepr {
                    a: p.a,
                    b: p.b,
                    kind: match &p.kind {
                        DensityKind::Constant(c) => PieceKindRepr::Constant(MatrixRepr::from_matrix(c)),
                        DensityKind::Poly(cs) => {
                            PieceKindRepr::Poly(cs.iter().map(MatrixRepr::from_matrix).collect())
                        }
                        DensityKind::Table { nodes, values } => PieceKindRepr::Table {
                            nodes: nodes.clone(),
                            values: values.iter().map(MatrixRepr::from_matrix).collect(),
                        },
                        DensityKind::Lorentzian { pole, weight } => PieceKindRepr::Lorentzian {
                            pole: [pole.re, pole.im],
                            weight: MatrixRepr::from_matrix(weight),
                        },
                    },
                })
                .collect(),
            tails: m
                .tails
                .iter()
                .map(|t| match t {
                    Tail::ConstantLeft { edge, value } => TailRepr::ConstantLeft {
                        edge: *edge,
                        value: MatrixRepr::from_matrix(value),
                    },
                    Tail::ConstantRight { edge, value } => TailRepr::ConstantRight {
                        edge: *edge,
                        value: MatrixRepr::from_matrix(value),
                    },
                    Tail::LorentzianBeyond { a, b, pole, weight } => TailRepr::LorentzianBeyond {
                        a: *a,
                        b: *b,
                        pole: [pole.re, pole.im],
                        weight: MatrixRepr::from_matrix(weight),
                    },
                })
                .collect(),
        }
    }
}

impl MeasureRepr {
    fn build(&self) -> Result<NevanlinnaMeasure> {
        let alpha = self.alpha.to_matrix()?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom::new(a.t, a.gamma.to_matrix()?)))
            .collect::<Result<Vec<_>>>()?;
        let pieces = self
            .density
            .iter()
            .map(|p| {
                let kind = match &p.kind {
                    PieceKindRepr::Constant(m) => DensityKind::Constant(m.to_matrix()?),
                    PieceKindRepr::Poly(ms) => DensityKind::Poly(
                        ms.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?,
                    ),
                    PieceKindRepr::Table { nodes, values } => DensityKind::Table {
                        nodes: nodes.clone(),
                        values: values
                            .iter()
                            .map(|m| m.to_matrix())
                            .collect::<Result<Vec<_>>>()?,
                    },
                    PieceKindRepr::Lorentzian { pole, weight } => DensityKind::Lorentzian {
                        pole: Complex64::new(pole[0], pole[1]),
                        weight: weight.to_matrix()?,
                    },
                };
                Ok(DensityPiece {
                    a: p.a,
                    b: p.b,
                    kind,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tails = self
            .tails
            .iter()
            .map(|t| {
                Ok(match t {
                    TailRepr::ConstantLeft { edge, value } => Tail::ConstantLeft {
                        edge: *edge,
                        value: value.to_matrix()?,
                    },
                    TailRepr::ConstantRight { edge, value } => Tail::ConstantRight {
                        edge: *edge,
                        value: value.to_matrix()?,
                    },
                    TailRepr::LorentzianBeyond { a, b, pole, weight } => Tail::LorentzianBeyond {
                        a: *a,
                        b: *b,
                        pole: Complex64::new(pole[0], pole[1]),
                        weight: weight.to_matrix()?,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        NevanlinnaMeasure::new(self.dim, alpha, atoms, pieces, tails)
    }
}

/// Frobenius distance between two measures' coarse data, used by round-trip
/// tests of the file format.
pub fn measure_distance(a: &NevanlinnaMeasure, b: &NevanlinnaMeasure) -> f64 {
    let mut d = fro_norm(&(a.alpha() - b.alpha()));
    d += (a.atoms().len() as f64 - b.atoms().len() as f64).abs();
    for (x, y) in a.atoms().iter().zip(b.atoms()) {
        d += (x.position - y.position).abs() + fro_norm(&(&x.weight - &y.weight));
    }
    d
}
