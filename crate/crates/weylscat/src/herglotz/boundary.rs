//! Boundary values from the upper half-plane.
//!
//! The limit `M(lambda + i0)` is computed by sampling along a geometric
//! epsilon ladder and eliminating the leading powers of epsilon with a
//! Richardson tableau. The ladder never touches the axis; divergence of the
//! extrapolants signals a pole or point mass at `lambda` and is reported as
//! [`Error::NoConvergence`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{fro_norm, CMatrix};

use super::sampler::WeylSampler;

/// Epsilon ladder and extrapolation policy for boundary values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundarySchedule {
    /// First (largest) imaginary offset.
    pub eps0: f64,
    /// Geometric ratio in (0, 1).
    pub ratio: f64,
    /// Number of ladder steps.
    pub steps: usize,
    /// Number of eliminated powers of epsilon.
    pub extrapolation_order: usize,
}

impl Default for BoundarySchedule {
    fn default() -> Self {
        BoundarySchedule {
            eps0: 1e-2,
            ratio: 0.5,
            steps: 12,
            extrapolation_order: 2,
        }
    }
}

impl BoundarySchedule {
    pub fn new(eps0: f64, ratio: f64, steps: usize, extrapolation_order: usize) -> Result<Self> {
        let s = BoundarySchedule {
            eps0,
            ratio,
            steps,
            extrapolation_order,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(Error::BadParameters {
                reason: "eps0 must be positive".into(),
            });
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::BadParameters {
                reason: "ratio must lie in (0, 1)".into(),
            });
        }
        if self.extrapolation_order == 0 || self.steps < self.extrapolation_order + 2 {
            return Err(Error::BadParameters {
                reason: "need extrapolation_order >= 1 and steps >= order + 2".into(),
            });
        }
        // stay above the noise floor
        if self.eps0 * self.ratio.powi(self.steps as i32) <= 1e-14 {
            return Err(Error::BadParameters {
                reason: "smallest ladder epsilon would sink below 1e-14".into(),
            });
        }
        Ok(())
    }

    pub fn epsilons(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|k| self.eps0 * self.ratio.powi(k as i32))
            .collect()
    }
}

/// Richardson-extrapolates `f(lambda + i eps)` to `eps -> 0`.
///
/// Returns the extrapolated value and the norm of the last extrapolation
/// correction as the error estimate.
pub fn extrapolate_to_axis(
    f: &dyn Fn(Complex64) -> Result<CMatrix>,
    lambda: f64,
    sched: &BoundarySchedule,
) -> Result<(CMatrix, f64)> {
    sched.validate()?;
    if !lambda.is_finite() {
        return Err(Error::BadParameters {
            reason: "lambda must be finite".into(),
        });
    }
    let eps = sched.epsilons();
    let samples: Vec<CMatrix> = eps
        .iter()
        .map(|&e| f(Complex64::new(lambda, e)))
        .collect::<Result<Vec<_>>>()?;

    // Gross pole detection on the raw samples: |M| ~ 1/eps growth.
    let n_first = fro_norm(&samples[0]);
    let n_last = fro_norm(samples.last().expect("nonempty ladder"));
    if n_last > 100.0 * (n_first + 1.0) {
        return Err(Error::NoConvergence { lambda });
    }

    // Neville-style tableau eliminating eps^1 .. eps^order.
    let order = sched.extrapolation_order;
    let mut tableau: Vec<Vec<CMatrix>> = vec![samples];
    for j in 1..=order {
        let rj = sched.ratio.powi(j as i32);
        let prev = &tableau[j - 1];
        let mut col = Vec::with_capacity(prev.len().saturating_sub(1));
        for k in 1..prev.len() {
            let num = &prev[k] - &prev[k - 1] * Complex64::new(rj, 0.0);
            col.push(num * Complex64::new(1.0 / (1.0 - rj), 0.0));
        }
        tableau.push(col);
    }
    let last_col = &tableau[order];
    let value = last_col.last().expect("nonempty tableau").clone();
    let prev_col_last = tableau[order - 1].last().expect("nonempty tableau");
    let err_estimate = fro_norm(&(&value - prev_col_last));

    // Divergence of successive extrapolants in the final column.
    if last_col.len() >= 4 {
        let l = last_col.len() - 1;
        let d = |k: usize| fro_norm(&(&last_col[k] - &last_col[k - 1]));
        let (d1, d2, d3) = (d(l), d(l - 1), d(l - 2));
        if d1 > d2 && d2 > d3 && d1 > 1e-7 * (1.0 + fro_norm(&value)) {
            return Err(Error::NoConvergence { lambda });
        }
    }

    Ok((value, err_estimate))
}

/// Boundary value `M(lambda + i0)` of a Weyl sampler.
pub fn boundary_limit(
    sampler: &WeylSampler,
    lambda: f64,
    sched: &BoundarySchedule,
) -> Result<(CMatrix, f64)> {
    extrapolate_to_axis(&|eta| sampler.eval(eta), lambda, sched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herglotz::measure::{Atom, NevanlinnaMeasure};

    fn scalar(x: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, x)
    }

    #[test]
    fn constant_function_is_exact() {
        let s = WeylSampler::closed_form(1, |_| Ok(scalar(Complex64::new(0.0, 1.0))));
        let (v, err) = boundary_limit(&s, 0.0, &BoundarySchedule::default()).unwrap();
        assert!((v[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(err, 0.0);
    }

    #[test]
    fn uniform_log_boundary_value() {
        // M(eta) = Log(1 - eta) - Log(-1 - eta); at lambda = 0 the limit is i pi
        let s = WeylSampler::closed_form(1, |eta| {
            Ok(scalar(
                (Complex64::new(1.0, 0.0) - eta).ln() - (Complex64::new(-1.0, 0.0) - eta).ln(),
            ))
        });
        let (v, err) = boundary_limit(&s, 0.0, &BoundarySchedule::default()).unwrap();
        assert!(
            (v[(0, 0)] - Complex64::new(0.0, std::f64::consts::PI)).norm() < 1e-8,
            "value {v}, err {err}"
        );
    }

    #[test]
    fn pole_on_axis_diverges() {
        let m = NevanlinnaMeasure::atomic(1, vec![Atom::scalar(0.0, 1.0)]).unwrap();
        let s = WeylSampler::from_measure(m);
        let r = boundary_limit(&s, 0.0, &BoundarySchedule::default());
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn near_pole_still_converges() {
        let m = NevanlinnaMeasure::atomic(1, vec![Atom::scalar(0.0, 1.0)]).unwrap();
        let s = WeylSampler::from_measure(m);
        let (v, _) = boundary_limit(&s, 0.1, &BoundarySchedule::default()).unwrap();
        // M(0.1 + i0) = -1/0.1 = -10
        assert!((v[(0, 0)] - Complex64::new(-10.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn schedule_validation() {
        assert!(BoundarySchedule::new(1e-2, 0.5, 12, 2).is_ok());
        assert!(BoundarySchedule::new(-1.0, 0.5, 12, 2).is_err());
        assert!(BoundarySchedule::new(1e-2, 1.5, 12, 2).is_err());
        assert!(BoundarySchedule::new(1e-2, 0.5, 60, 2).is_err()); // below noise floor
        assert!(BoundarySchedule::new(1e-2, 0.5, 3, 2).is_err());
    }
}
