//! Measure recovery from boundary values (Stieltjes inversion).
//!
//! The absolutely continuous part is `Im M(lambda + i0) / pi`, extrapolated
//! on the support grid; point masses appear as `eps * Im M(t + i eps)`
//! staying bounded away from zero as `eps -> 0`. Recovery runs in stages:
//!
//!  1. scan the grid at a fixed probe `eps` for local peaks of
//!     `eps * ||Im M||` above the atom threshold,
//!  2. refine each peak position by golden-section search and its weight by
//!     extrapolating `eps * Im M(t + i eps)` to zero; peaks whose weight
//!     extrapolates below the threshold were density artifacts and are
//!     dropped,
//!  3. extrapolate the density at every grid point (points where the
//!     extrapolation diverges sit on atoms and are interpolated from their
//!     neighbors),
//!  4. attach constant tails when the density has not decayed at the grid
//!     edges, rejecting grids whose estimated beyond-edge mass exceeds 1% of
//!     the total,
//!  5. recover the Hermitian offset from the defect of the reconstruction at
//!     `eta = i`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{fro_norm, herm_part, im_part, psd_project, CMatrix};

use super::boundary::{extrapolate_to_axis, BoundarySchedule};
use super::measure::{Atom, DensityKind, DensityPiece, NevanlinnaMeasure, Tail};
use super::sampler::{eval_weyl, WeylSampler};

fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|k| m[(k, k)].re).sum()
}

/// `eps * ||Im M(t + i eps)||_F`, the atom indicator.
fn atom_indicator(sampler: &WeylSampler, t: f64, eps: f64) -> Result<f64> {
    let m = sampler.eval(Complex64::new(t, eps))?;
    Ok(eps * fro_norm(&im_part(&m)))
}

fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Extrapolated weight `lim eps * Im M(t + i eps)`.
fn atom_weight(sampler: &WeylSampler, t: f64, eps: f64) -> Result<CMatrix> {
    let sched = BoundarySchedule {
        eps0: eps,
        ratio: 0.5,
        steps: 8,
        extrapolation_order: 2,
    };
    let f = |eta: Complex64| -> Result<CMatrix> {
        let m = sampler.eval(eta)?;
        Ok(im_part(&m) * Complex64::new(eta.im, 0.0))
    };
    let (w, _) = extrapolate_to_axis(&f, t, &sched)?;
    psd_project(&w)
}

struct AtomScan {
    atoms: Vec<Atom>,
}

fn scan_atoms(
    sampler: &WeylSampler,
    grid: &[f64],
    eps: f64,
    atom_threshold: f64,
) -> Result<AtomScan> {
    let indicator: Vec<f64> = grid
        .iter()
        .map(|&t| atom_indicator(sampler, t, eps))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = indicator.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    // A real point mass towers over the density plateau (mass/eps versus
    // eps * pi * density); the median prune keeps plateau noise from
    // producing hundreds of rejected candidates.
    let cut = atom_threshold.max(2.0 * median);

    let mut atoms: Vec<Atom> = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        if indicator[i] <= cut || indicator[i] < indicator[i - 1] || indicator[i] < indicator[i + 1]
        {
            continue;
        }
        let eps_refine = eps / 10.0;
        let position = golden_section_max(
            |t| {
                let m = sampler.eval(Complex64::new(t, eps_refine))?;
                Ok(fro_norm(&im_part(&m)))
            },
            grid[i - 1],
            grid[i + 1],
            1e-12 * (1.0 + grid[i].abs()),
        )?;
        let weight = atom_weight(sampler, position, eps)?;
        if fro_norm(&weight) < atom_threshold {
            continue;
        }
        let spacing = grid[i + 1] - grid[i - 1];
        if let Some(last) = atoms.last() {
            if (last.position - position).abs() < 0.5 * spacing {
                continue; // same peak seen from an adjacent grid maximum
            }
        }
        atoms.push(Atom::new(position, weight));
    }
    Ok(AtomScan { atoms })
}

/// Recovers the measure data of a sampler over a support grid.
///
/// `eps` is the atom probe offset (the density pass uses the default
/// [`BoundarySchedule`]); `atom_threshold` cuts both the peak indicator and
/// the extrapolated weight norm.
pub fn stieltjes_invert(
    sampler: &WeylSampler,
    support_grid: &[f64],
    eps: f64,
    atom_threshold: f64,
) -> Result<NevanlinnaMeasure> {
    stieltjes_invert_with(
        sampler,
        support_grid,
        eps,
        atom_threshold,
        &BoundarySchedule::default(),
    )
}

/// [`stieltjes_invert`] with an explicit density-pass schedule.
pub fn stieltjes_invert_with(
    sampler: &WeylSampler,
    support_grid: &[f64],
    eps: f64,
    atom_threshold: f64,
    sched: &BoundarySchedule,
) -> Result<NevanlinnaMeasure> {
    if support_grid.len() < 4 {
        return Err(Error::BadParameters {
            reason: "support grid needs at least 4 points".into(),
        });
    }
    if support_grid.iter().any(|t| !t.is_finite())
        || support_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::BadParameters {
            reason: "support grid must be finite and strictly increasing".into(),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadParameters {
            reason: "eps must be positive".into(),
        });
    }
    let dim = sampler.dim();
    sched.validate()?;

    let scan = scan_atoms(sampler, support_grid, eps, atom_threshold)?;

    // Density pass.
    let mut density: Vec<Option<CMatrix>> = Vec::with_capacity(support_grid.len());
    let mut flagged = 0usize;
    for &t in support_grid {
        match super::boundary::boundary_limit(sampler, t, sched) {
            Ok((m, _err)) => {
                let d = psd_project(&(im_part(&m) / Complex64::new(std::f64::consts::PI, 0.0)))?;
                density.push(Some(d));
            }
            Err(Error::NoConvergence { .. }) => {
                flagged += 1;
                density.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    if 2 * flagged > support_grid.len() {
        return Err(Error::NoConvergence {
            lambda: support_grid[density.iter().position(Option::is_none).unwrap_or(0)],
        });
    }
    // Fill flagged points from their nearest resolved neighbors.
    let filled: Vec<CMatrix> = (0..density.len())
        .map(|i| {
            if let Some(d) = &density[i] {
                return d.clone();
            }
            let left = (0..i).rev().find(|&j| density[j].is_some());
            let right = (i + 1..density.len()).find(|&j| density[j].is_some());
            match (left, right) {
                (Some(l), Some(r)) => {
                    let w = (support_grid[i] - support_grid[l]) / (support_grid[r] - support_grid[l]);
                    density[l].as_ref().unwrap() * Complex64::new(1.0 - w, 0.0)
                        + density[r].as_ref().unwrap() * Complex64::new(w, 0.0)
                }
                (Some(l), None) => density[l].as_ref().unwrap().clone(),
                (None, Some(r)) => density[r].as_ref().unwrap().clone(),
                (None, None) => CMatrix::zeros(dim, dim),
            }
        })
        .collect();

    // Trapezoid mass of trace(density)/(1+t^2) decides whether the a.c. part
    // is present at all.
    let mut piece_mass = 0.0;
    for w in 0..support_grid.len() - 1 {
        let (t0, t1) = (support_grid[w], support_grid[w + 1]);
        let f0 = trace_re(&filled[w]) / (1.0 + t0 * t0);
        let f1 = trace_re(&filled[w + 1]) / (1.0 + t1 * t1);
        piece_mass += 0.5 * (f0 + f1) * (t1 - t0);
    }
    let atom_mass: f64 = scan
        .atoms
        .iter()
        .map(|a| trace_re(&a.weight) / (1.0 + a.position * a.position))
        .sum();

    let mut pieces = Vec::new();
    if piece_mass > 1e-10 * (1.0 + atom_mass) {
        pieces.push(DensityPiece {
            a: support_grid[0],
            b: *support_grid.last().unwrap(),
            kind: DensityKind::Table {
                nodes: support_grid.to_vec(),
                values: filled.clone(),
            },
        });
    }

    // Constant tails where the density has not decayed at the edges.
    let mut tails = Vec::new();
    let mut tail_mass = 0.0;
    let edge_lo = support_grid[0];
    let edge_hi = *support_grid.last().unwrap();
    let attach_cut = 1e-10 * (1.0 + atom_mass + piece_mass);
    let lo_mass = trace_re(&filled[0]) * (edge_lo.atan() + std::f64::consts::FRAC_PI_2);
    if lo_mass > attach_cut {
        tails.push(Tail::ConstantLeft {
            edge: edge_lo,
            value: filled[0].clone(),
        });
        tail_mass += lo_mass;
    }
    let hi_mass =
        trace_re(filled.last().unwrap()) * (std::f64::consts::FRAC_PI_2 - edge_hi.atan());
    if hi_mass > attach_cut {
        tails.push(Tail::ConstantRight {
            edge: edge_hi,
            value: filled.last().unwrap().clone(),
        });
        tail_mass += hi_mass;
    }
    let total_mass = atom_mass + piece_mass + tail_mass;
    if total_mass > 0.0 && tail_mass / total_mass > 0.01 {
        return Err(Error::SupportNotCovered {
            fraction: tail_mass / total_mass,
        });
    }

    // Hermitian offset: whatever the reconstruction misses at eta = i.
    let bare = NevanlinnaMeasure::new(
        dim,
        CMatrix::zeros(dim, dim),
        scan.atoms.clone(),
        pieces.clone(),
        tails.clone(),
    )?;
    let at_i = sampler.eval(Complex64::new(0.0, 1.0))?;
    let rec_at_i = eval_weyl(&bare, Complex64::new(0.0, 1.0))?;
    let alpha = herm_part(&(at_i - rec_at_i));

    NevanlinnaMeasure::new(dim, alpha, scan.atoms, pieces, tails)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herglotz::measure::DensityPiece;

    fn scalar(x: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, x)
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn constant_model_recovers_density_one_over_pi() {
        let s = WeylSampler::closed_form(1, |_| Ok(scalar(Complex64::new(0.0, 1.0))));
        let mut grid = linspace(-40.0, 40.0, 161);
        // extend geometrically so the edge mass stays under 1%
        let mut t = 40.0;
        while t < 400.0 {
            t *= 1.25;
            grid.push(t);
            grid.insert(0, -t);
        }
        let m = stieltjes_invert(&s, &grid, 1e-4, 1e-6).unwrap();
        assert!(m.atoms().is_empty());
        let d = m.density_at(0.0)[(0, 0)].re;
        assert!((d - 1.0 / std::f64::consts::PI).abs() < 1e-8, "density {d}");
        assert!(fro_norm(m.alpha()) < 1e-8);
        // tails attached on both sides
        assert_eq!(m.tails().len(), 2);
        let v = eval_weyl(&m, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-6, "{v}");
    }

    #[test]
    fn pole_model_recovers_single_atom() {
        let s = WeylSampler::closed_form(1, |eta| Ok(scalar(-Complex64::new(1.0, 0.0) / eta)));
        let grid = linspace(-2.0, 2.0, 81);
        let m = stieltjes_invert(&s, &grid, 1e-4, 1e-6).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!(m.atoms()[0].position.abs() < 1e-7);
        assert!((m.atoms()[0].weight[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(m.pieces().is_empty(), "density should be negligible");
        assert!(m.tails().is_empty());
    }

    #[test]
    fn uniform_model_round_trip() {
        let original = NevanlinnaMeasure::new(
            1,
            scalar(Complex64::new(0.0, 0.0)),
            vec![],
            vec![DensityPiece::constant(-1.0, 1.0, scalar(Complex64::new(1.0, 0.0)))],
            vec![],
        )
        .unwrap();
        let s = WeylSampler::closed_form(1, |eta| {
            Ok(scalar(
                (Complex64::new(1.0, 0.0) - eta).ln() - (Complex64::new(-1.0, 0.0) - eta).ln(),
            ))
        });
        let grid = linspace(-2.0, 2.0, 401);
        let m = stieltjes_invert(&s, &grid, 1e-4, 1e-6).unwrap();
        assert!(m.atoms().is_empty());
        for &t in &[-0.8, -0.3, 0.0, 0.4, 0.9] {
            let got = m.density_at(t)[(0, 0)].re;
            let expect = original.density_at(t)[(0, 0)].re;
            assert!((got - expect).abs() < 1e-4, "density at {t}: {got} vs {expect}");
        }
        for &t in &[-1.8, 1.5] {
            assert!(m.density_at(t)[(0, 0)].re < 1e-6);
        }
        assert!(fro_norm(m.alpha()) < 1e-4);
    }

    #[test]
    fn matrix_valued_recovery() {
        use crate::linalg::from_rows;
        // anisotropic 2x2: constant density diag(1, 2) on [-1, 1] plus an
        // off-diagonal-coupled atom
        let dens = from_rows(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        let gamma = from_rows(2, 2, &[(1.0, 0.0), (0.5, 0.2), (0.5, -0.2), (0.5, 0.0)]);
        let original = NevanlinnaMeasure::new(
            2,
            CMatrix::zeros(2, 2),
            vec![super::Atom::new(2.0, gamma.clone())],
            vec![DensityPiece::constant(-1.0, 1.0, dens.clone())],
            vec![],
        )
        .unwrap();
        let s = WeylSampler::from_measure(original);
        let grid = linspace(-1.5, 2.5, 401);
        let m = stieltjes_invert(&s, &grid, 1e-4, 1e-6).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!((m.atoms()[0].position - 2.0).abs() < 1e-7);
        assert!(fro_norm(&(&m.atoms()[0].weight - &gamma)) < 1e-6);
        for &t in &[-0.5, 0.0, 0.5] {
            assert!(fro_norm(&(m.density_at(t) - &dens)) < 1e-4, "density at {t}");
        }
    }

    #[test]
    fn grid_not_covering_support_is_rejected() {
        // density 1/pi everywhere, but a narrow grid
        let s = WeylSampler::closed_form(1, |_| Ok(scalar(Complex64::new(0.0, 1.0))));
        let grid = linspace(-3.0, 3.0, 61);
        let r = stieltjes_invert(&s, &grid, 1e-4, 1e-6);
        assert!(matches!(r, Err(Error::SupportNotCovered { .. })));
    }
}
