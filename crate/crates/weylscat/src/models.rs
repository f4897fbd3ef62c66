//! Bundled analytic models with closed-form ground truth, plus the
//! brute-force quadrature oracle used by derived expected values and
//! property tests.
//!
//! Every measure-backed model pairs an exact closed-form sampler with the
//! equivalent measure data, so the adaptive quadrature path can be checked
//! against both the closed form and the fixed-resolution Simpson oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herglotz::{
    cauchy_kernel, Atom, DensityKind, DensityPiece, NevanlinnaMeasure, Tail, WeylSampler,
};
use crate::inverse::ContractiveSampler;
use crate::linalg::{herm_part, identity, CMatrix};
use crate::scattering::DissipativeMatrix;

fn default_dim() -> usize {
    1
}

/// Matrix literal in model files: rows of `[re, im]` entries.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_data(data: &MatrixData) -> Result<CMatrix> {
    let rows = data.len();
    if rows == 0 || data.iter().any(|r| r.len() != data[0].len()) {
        return Err(Error::BadParameters {
            reason: "matrix data must be rectangular and nonempty".into(),
        });
    }
    Ok(CMatrix::from_fn(rows, data[0].len(), |r, c| {
        Complex64::new(data[r][c][0], data[r][c][1])
    }))
}

pub fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

/// Atom parameters of the `atomic` model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomParam {
    pub t: f64,
    pub weight: MatrixData,
}

/// One term of the `rational` model: a pole below the axis with a PSD weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTerm {
    /// `[re, im]` with `im != 0`; poles given above the axis are mirrored.
    pub pole: [f64; 2],
    pub weight: MatrixData,
}

/// Named bundled models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Constant contraction `c I`; the transformed function is `i (1+c)/(1-c) I`.
    ConstantW {
        #[serde(default = "default_dim")]
        dim: usize,
        c: f64,
    },
    /// Density `I` on `[a, b]`: `M(eta) = (Log(b - eta) - Log(a - eta)) I`.
    UniformDensity {
        #[serde(default = "default_dim")]
        dim: usize,
        a: f64,
        b: f64,
    },
    /// Finite sum of point masses.
    Atomic {
        #[serde(default = "default_dim")]
        dim: usize,
        atoms: Vec<AtomParam>,
    },
    /// Finite sum of Lorentzian terms `weight/(pole - eta)` normalized at `i`.
    Rational {
        #[serde(default = "default_dim")]
        dim: usize,
        terms: Vec<RationalTerm>,
    },
    /// Seeded strictly dissipative parameter `A - i (B*B + 0.1 I)`.
    RandomDissipativeD { dim: usize, seed: u64 },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("unknown variant") {
                Error::UnknownModel { name: msg }
            } else {
                Error::BadParameters {
                    reason: format!("model spec parse error: {msg}"),
                }
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::ConstantW { .. } => "constant_w",
            ModelSpec::UniformDensity { .. } => "uniform_density",
            ModelSpec::Atomic { .. } => "atomic",
            ModelSpec::Rational { .. } => "rational",
            ModelSpec::RandomDissipativeD { .. } => "random_dissipative_d",
        }
    }
}

/// A constructed model: evaluators plus optional exact measure data.
#[derive(Debug)]
pub struct BuiltModel {
    pub dim: usize,
    /// Weyl-side evaluator (absent for the dissipative-parameter model).
    pub sampler: Option<WeylSampler>,
    /// Exact measure data when the model has one.
    pub measure: Option<NevanlinnaMeasure>,
    /// Contraction-side evaluator (Cayley image of the sampler, or the
    /// constant itself for `constant_w`).
    pub contraction: Option<ContractiveSampler>,
    /// Dissipative parameter (only for `random_dissipative_d`).
    pub dissipative: Option<DissipativeMatrix>,
    /// Human-readable closed form.
    pub notes: String,
}

/// Builds a bundled model from its spec.
pub fn build_model(spec: &ModelSpec) -> Result<BuiltModel> {
    match spec {
        ModelSpec::ConstantW { dim, c } => {
            let (dim, c) = (*dim, *c);
            if dim == 0 {
                return Err(Error::BadParameters {
                    reason: "dim must be positive".into(),
                });
            }
            if !(c > -1.0 && c < 1.0) {
                return Err(Error::BadParameters {
                    reason: format!("constant_w needs c in (-1, 1), got {c}"),
                });
            }
            let beta = (1.0 + c) / (1.0 - c);
            let mval = identity(dim) * Complex64::new(0.0, beta);
            let m = mval.clone();
            let sampler = WeylSampler::closed_form(dim, move |_| Ok(m.clone()));
            // density beta/pi on the whole line, split at +-50
            let dens = identity(dim) * Complex64::new(beta / std::f64::consts::PI, 0.0);
            let measure = NevanlinnaMeasure::new(
                dim,
                CMatrix::zeros(dim, dim),
                vec![],
                vec![DensityPiece::constant(-50.0, 50.0, dens.clone())],
                vec![
                    Tail::ConstantLeft {
                        edge: -50.0,
                        value: dens.clone(),
                    },
                    Tail::ConstantRight {
                        edge: 50.0,
                        value: dens,
                    },
                ],
            )?;
            let wval = identity(dim) * Complex64::new(c, 0.0);
            let contraction = ContractiveSampler::constant(wval)?;
            Ok(BuiltModel {
                dim,
                sampler: Some(sampler),
                measure: Some(measure),
                contraction: Some(contraction),
                dissipative: None,
                notes: format!("M = {beta} i I (constant), W = {c} I"),
            })
        }
        ModelSpec::UniformDensity { dim, a, b } => {
            let (dim, a, b) = (*dim, *a, *b);
            if dim == 0 || !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::BadParameters {
                    reason: format!("uniform_density needs a < b, got [{a}, {b}]"),
                });
            }
            let sampler = WeylSampler::closed_form(dim, move |eta| {
                let v = (Complex64::new(b, 0.0) - eta).ln() - (Complex64::new(a, 0.0) - eta).ln();
                Ok(identity(dim) * v)
            });
            // the normalization term of the kernel shifts the offset
            let alpha = identity(dim)
                * Complex64::new(0.5 * ((1.0 + b * b) / (1.0 + a * a)).ln(), 0.0);
            let measure = NevanlinnaMeasure::new(
                dim,
                alpha,
                vec![],
                vec![DensityPiece::constant(a, b, identity(dim))],
                vec![],
            )?;
            let contraction = Some(ContractiveSampler::from_weyl(sampler.clone()));
            Ok(BuiltModel {
                dim,
                sampler: Some(sampler),
                measure: Some(measure),
                contraction,
                dissipative: None,
                notes: format!("M(eta) = (Log({b} - eta) - Log({a} - eta)) I"),
            })
        }
        ModelSpec::Atomic { dim, atoms } => {
            let dim = *dim;
            if atoms.is_empty() {
                return Err(Error::BadParameters {
                    reason: "atomic model needs at least one atom".into(),
                });
            }
            let parsed: Vec<Atom> = atoms
                .iter()
                .map(|a| Ok(Atom::new(a.t, matrix_from_data(&a.weight)?)))
                .collect::<Result<Vec<_>>>()?;
            let measure = NevanlinnaMeasure::atomic(dim, parsed)?;
            let sampler = WeylSampler::from_measure(measure.clone());
            let contraction = Some(ContractiveSampler::from_weyl(sampler.clone()));
            Ok(BuiltModel {
                dim,
                sampler: Some(sampler),
                measure: Some(measure),
                contraction,
                dissipative: None,
                notes: "M(eta) = sum_j (1/(t_j - eta) - t_j/(1+t_j^2)) Gamma_j".into(),
            })
        }
        ModelSpec::Rational { dim, terms } => {
            let dim = *dim;
            if terms.is_empty() {
                return Err(Error::BadParameters {
                    reason: "rational model needs at least one term".into(),
                });
            }
            // normalize poles to the lower half-plane for the closed form
            let mut lower: Vec<(Complex64, CMatrix)> = Vec::with_capacity(terms.len());
            for t in terms {
                let p = Complex64::new(t.pole[0], t.pole[1]);
                if p.im == 0.0 {
                    return Err(Error::BadParameters {
                        reason: "rational pole must be off the real axis".into(),
                    });
                }
                let q = if p.im < 0.0 { p } else { p.conj() };
                lower.push((q, matrix_from_data(&t.weight)?));
            }
            let closed = lower.clone();
            let sampler = WeylSampler::closed_form(dim, move |eta| {
                let mut acc = CMatrix::zeros(dim, dim);
                for (q, gamma) in &closed {
                    let c = Complex64::new(1.0, 0.0) / (*q - Complex64::new(0.0, 1.0));
                    acc += gamma
                        * (Complex64::new(1.0, 0.0) / (*q - eta) - Complex64::new(c.re, 0.0));
                }
                Ok(acc)
            });
            // measure: Lorentzian bumps on a window capturing the bulk, exact
            // remainders as tails
            let radius = lower
                .iter()
                .map(|(q, _)| q.re.abs() + 20.0 * q.im.abs())
                .fold(20.0f64, f64::max);
            let mut pieces = Vec::new();
            let mut tails = Vec::new();
            for (q, gamma) in &lower {
                let upper = q.conj();
                pieces.push(DensityPiece {
                    a: -radius,
                    b: radius,
                    kind: DensityKind::Lorentzian {
                        pole: upper,
                        weight: gamma.clone(),
                    },
                });
                tails.push(Tail::LorentzianBeyond {
                    a: -radius,
                    b: radius,
                    pole: upper,
                    weight: gamma.clone(),
                });
            }
            let measure =
                NevanlinnaMeasure::new(dim, CMatrix::zeros(dim, dim), vec![], pieces, tails)?;
            let contraction = Some(ContractiveSampler::from_weyl(sampler.clone()));
            Ok(BuiltModel {
                dim,
                sampler: Some(sampler),
                measure: Some(measure),
                contraction,
                dissipative: None,
                notes: "M(eta) = sum_k Gamma_k (1/(q_k - eta) - Re 1/(q_k - i)), Im q_k < 0".into(),
            })
        }
        ModelSpec::RandomDissipativeD { dim, seed } => {
            let dim = *dim;
            if dim == 0 {
                return Err(Error::BadParameters {
                    reason: "dim must be positive".into(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut draw = |scale: f64| {
                CMatrix::from_fn(dim, dim, |_, _| {
                    Complex64::new(
                        scale * (rng.random::<f64>() - 0.5),
                        scale * (rng.random::<f64>() - 0.5),
                    )
                })
            };
            let a = herm_part(&draw(2.0));
            let b = draw(1.0);
            let d = a + (b.adjoint() * &b + identity(dim) * Complex64::new(0.1, 0.0))
                * Complex64::new(0.0, -1.0);
            let dissipative = DissipativeMatrix::new(d)?;
            Ok(BuiltModel {
                dim,
                sampler: None,
                measure: None,
                contraction: None,
                dissipative: Some(dissipative),
                notes: "D = A - i (B*B + 0.1 I), A Hermitian".into(),
            })
        }
    }
}

/// Fixed-resolution composite-Simpson evaluation of a measure model at `eta`:
/// 100000 panels per density piece, no adaptivity, exact atom sums and tail
/// corrections. Intended as an independent check of the adaptive quadrature
/// in `eval_weyl`; keep `|Im eta|` well away from zero.
pub fn quadrature_oracle(model: &NevanlinnaMeasure, eta: Complex64) -> Result<CMatrix> {
    if eta.im == 0.0 || !eta.is_finite() {
        return Err(Error::RealAxisEvaluation { eta });
    }
    let mut acc = model.alpha().clone();
    acc += model.atom_cauchy(eta);
    acc += model.tail_cauchy(eta);
    for piece in model.pieces() {
        let n = 100_000usize;
        let h = (piece.b - piece.a) / n as f64;
        let f = |t: f64| piece.eval(t) * cauchy_kernel(t, eta);
        let mut sum = f(piece.a) + f(piece.b);
        for k in 1..n {
            let t = piece.a + h * k as f64;
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += f(t) * Complex64::new(w, 0.0);
        }
        acc += sum * Complex64::new(h / 3.0, 0.0);
    }
    Ok(acc)
}
