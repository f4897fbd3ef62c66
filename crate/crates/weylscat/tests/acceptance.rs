//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N (...): PASS` line (run with `--nocapture` to see them all).
//! Every tolerance is pinned in the assertions below.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weylscat::herglotz::{
    boundary_limit, eval_weyl, gamma_gram, BoundarySchedule, WeylSampler,
};
use weylscat::inverse::{
    check_admissibility, default_y_ladder, m_to_w, realize, w_to_m, ContractiveSampler,
};
use weylscat::linalg::{
    defect_unitary, fro_norm, identity, im_part, op_norm, CMatrix, DEFAULT_RTOL,
};
use weylscat::models::{build_model, AtomParam, ModelSpec, RationalTerm};
use weylscat::scattering::{
    coupled_blocks, lax_phillips, scattering_matrix, scattering_sweep,
    spectral_density_cross_check, DissipativeMatrix, SampleStatus,
};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

fn uniform_model() -> weylscat::models::BuiltModel {
    build_model(&ModelSpec::UniformDensity {
        dim: 1,
        a: -1.0,
        b: 1.0,
    })
    .unwrap()
}

/// The three bundled rational sweep models (n = 1, 2, 4).
fn rational_models() -> Vec<weylscat::models::BuiltModel> {
    let m1 = ModelSpec::Rational {
        dim: 1,
        terms: vec![RationalTerm {
            pole: [0.0, -0.5],
            weight: vec![vec![[1.0, 0.0]]],
        }],
    };
    let m2 = ModelSpec::Rational {
        dim: 2,
        terms: vec![
            RationalTerm {
                pole: [0.4, -0.6],
                weight: vec![vec![[1.0, 0.0], [0.3, 0.1]], vec![[0.3, -0.1], [0.8, 0.0]]],
            },
            RationalTerm {
                pole: [-0.7, -0.8],
                weight: vec![vec![[0.6, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [1.2, 0.0]]],
            },
        ],
    };
    // n = 4: three terms whose weights jointly have full rank
    let e = |k: usize, scale: f64| -> Vec<Vec<[f64; 2]>> {
        (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| {
                        if r == c && (r == k || r == (k + 1) % 4) {
                            [scale, 0.0]
                        } else {
                            [0.0, 0.0]
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let m4 = ModelSpec::Rational {
        dim: 4,
        terms: vec![
            RationalTerm {
                pole: [0.0, -0.5],
                weight: e(0, 1.0),
            },
            RationalTerm {
                pole: [0.9, -0.7],
                weight: e(1, 0.8),
            },
            RationalTerm {
                pole: [-0.9, -0.9],
                weight: e(2, 1.3),
            },
        ],
    };
    vec![
        build_model(&m1).unwrap(),
        build_model(&m2).unwrap(),
        build_model(&m4).unwrap(),
    ]
}

fn sweep_grids() -> Vec<(String, WeylSampler, Vec<f64>)> {
    let mut out = Vec::new();
    out.push((
        "uniform_density(-1,1)".to_string(),
        uniform_model().sampler.unwrap(),
        linspace(-0.98, 0.98, 201),
    ));
    for (k, built) in rational_models().into_iter().enumerate() {
        out.push((
            format!("rational[{k}] (n={})", built.dim),
            built.sampler.unwrap(),
            linspace(-2.0, 2.0, 201),
        ));
    }
    out
}

#[test]
fn criterion_1_unitarity_suite() {
    let start = Instant::now();
    let sched = BoundarySchedule::default();
    let mut checked = 0usize;
    for (name, sampler, grid) in sweep_grids() {
        let rows = scattering_sweep(&sampler, &grid, &sched, DEFAULT_RTOL).unwrap();
        assert_eq!(rows.len(), 201);
        let flagged = rows.iter().filter(|r| r.status != SampleStatus::Ok).count();
        assert!(
            flagged * 20 <= rows.len(),
            "{name}: too many flagged rows ({flagged})"
        );
        for row in rows.iter().filter(|r| r.status == SampleStatus::Ok) {
            assert!(
                row.unitarity_defect < 1e-8,
                "{name} at lambda={}: unitarity defect {:.3e}",
                row.lambda,
                row.unitarity_defect
            );
            checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
    println!(
        "criterion 1 (unitarity suite, {checked} samples, {elapsed:.2}s): PASS"
    );
}

#[test]
fn criterion_2_trivial_exact_values() {
    let built = build_model(&ModelSpec::ConstantW { dim: 1, c: 0.0 }).unwrap();
    let sampler = built.sampler.unwrap();
    let sched = BoundarySchedule::default();
    let d = DissipativeMatrix::minus_i_identity(1);
    for lambda in linspace(-2.0, 2.0, 41) {
        let (mval, _) = boundary_limit(&sampler, lambda, &sched).unwrap();
        let s = scattering_matrix(&mval, DEFAULT_RTOL).unwrap();
        assert_eq!(s.rank, 1);
        assert!(
            (s.s[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14,
            "S_AB({lambda}) = {}",
            s.s[(0, 0)]
        );
        let lp = lax_phillips(&mval, &d).unwrap();
        assert!(lp[(0, 0)].norm() < 1e-14, "S_LP({lambda}) = {}", lp[(0, 0)]);
    }
    println!("criterion 2 (trivial exact values): PASS");
}

#[test]
fn criterion_3_coupled_consistency() {
    let built = uniform_model();
    let sampler = built.sampler.unwrap();
    let sched = BoundarySchedule::default();
    let d = DissipativeMatrix::minus_i_identity(1);
    for &lambda in &[-0.5, 0.0, 0.5] {
        let (mval, _) = boundary_limit(&sampler, lambda, &sched).unwrap();
        let blocks = coupled_blocks(&mval, &d, DEFAULT_RTOL).unwrap();
        let defect = defect_unitary(&blocks.full).unwrap();
        assert!(defect < 1e-8, "lambda={lambda}: full defect {defect:.3e}");
        let lp = lax_phillips(&mval, &d).unwrap();
        let lower_right = blocks
            .full
            .view((blocks.rank, blocks.rank), (1, 1))
            .into_owned();
        assert!(
            fro_norm(&(lower_right - lp)) < 1e-12,
            "lambda={lambda}: channel block mismatch"
        );
        if lambda == 0.0 {
            let expect = weylscat::linalg::from_rows(
                2,
                2,
                &[
                    (-0.5171, 0.0),
                    (-0.8560, 0.0),
                    (-0.8560, 0.0),
                    (0.5171, 0.0),
                ],
            );
            assert!(
                fro_norm(&(&blocks.full - &expect)) < 5e-4,
                "lambda=0 matrix {}",
                blocks.full
            );
        }
    }
    println!("criterion 3 (coupled consistency): PASS");
}

#[test]
fn criterion_4_representation_equivalence() {
    let sched = BoundarySchedule::default();
    // discrepancy between the two scattering representations on every grid
    // point of criterion 1
    for (name, sampler, grid) in sweep_grids() {
        for &lambda in &grid {
            let (mval, _) = match boundary_limit(&sampler, lambda, &sched) {
                Ok(v) => v,
                Err(weylscat::Error::NoConvergence { .. }) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            let r = match spectral_density_cross_check(&mval, lambda, DEFAULT_RTOL) {
                Ok(r) => r,
                Err(weylscat::Error::SingularWeylValue { .. }) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            assert!(
                r.discrepancy < 1e-10,
                "{name} at {lambda}: discrepancy {:.3e}",
                r.discrepancy
            );
        }
    }
    // spectral density against the finite-difference derivative of the
    // cumulative normalized measure, on the uniform model
    let built = uniform_model();
    let sampler = built.sampler.unwrap();
    let measure = built.measure.unwrap();
    let h = 1e-3;
    for &lambda in &[-0.8, -0.5, -0.1, 0.3, 0.7] {
        let (mval, _) = boundary_limit(&sampler, lambda, &sched).unwrap();
        let k = im_part(&mval)
            * Complex64::new(1.0 / (std::f64::consts::PI * (1.0 + lambda * lambda)), 0.0);
        let hi = measure.weighted_cumulative(lambda + h).unwrap();
        let lo = measure.weighted_cumulative(lambda - h).unwrap();
        let fd = (hi - lo) / Complex64::new(2.0 * h, 0.0);
        let rel = fro_norm(&(&k - &fd)) / fro_norm(&k);
        assert!(rel < 1e-4, "lambda={lambda}: K vs derivative rel error {rel:.3e}");
    }
    println!("criterion 4 (representation equivalence): PASS");
}

#[test]
fn criterion_5_gamma_field_identity() {
    let measure = uniform_model().measure.unwrap();
    let mut pts = Vec::new();
    for k in 0..5 {
        let re = -2.0 + k as f64;
        pts.push(Complex64::new(re, 0.4));
        pts.push(Complex64::new(re, 1.1));
    }
    assert_eq!(pts.len(), 10);
    let mut worst: f64 = 0.0;
    for &lambda in &pts {
        let m_l = eval_weyl(&measure, lambda).unwrap();
        for &mu in &pts {
            let m_mu = eval_weyl(&measure, mu).unwrap();
            let gram = gamma_gram(&measure, lambda, mu).unwrap();
            let defect = fro_norm(&(&m_l - m_mu.adjoint() - gram * (lambda - mu.conj())))
                / fro_norm(&m_l);
            worst = worst.max(defect);
        }
    }
    assert!(worst < 1e-6, "max relative defect {worst:.3e}");
    println!("criterion 5 (gamma-field identity, max defect {worst:.2e}): PASS");
}

#[test]
fn criterion_6_cayley_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let dims = [1usize, 2, 4];
    for k in 0..100 {
        let n = dims[k % dims.len()];
        let raw = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let scale = 0.05 + 0.9 * rng.random::<f64>();
        let norm = op_norm(&raw).unwrap();
        let w = raw * Complex64::new(scale / (norm + 1e-12), 0.0);
        let back = m_to_w(&w_to_m(&w).unwrap()).unwrap();
        let err = fro_norm(&(back - &w));
        assert!(err < 1e-12, "case {k} (n={n}): {err:.3e}");
    }
    println!("criterion 6 (Cayley round trip, 100 cases): PASS");
}

fn realize_grid_wide() -> Vec<f64> {
    // dense center plus geometric extension so edge mass stays below 1%
    let mut grid = linspace(-20.0, 20.0, 201);
    let mut t: f64 = 20.0;
    while t < 500.0 {
        t *= 1.2;
        grid.push(t);
        grid.insert(0, -t);
    }
    grid
}

#[test]
fn criterion_7_full_inverse_pipeline() {
    let sched = BoundarySchedule::default();

    for (name, c, expect_density) in [
        ("W = 0", 0.0, 1.0 / std::f64::consts::PI),
        ("W = I/2", 0.5, 3.0 / std::f64::consts::PI),
    ] {
        let start = Instant::now();
        let w = ContractiveSampler::constant(identity(1) * Complex64::new(c, 0.0)).unwrap();
        let (measure, roundtrip) = realize(&w, &realize_grid_wide(), &sched).unwrap();
        assert!(roundtrip < 1e-4, "{name}: roundtrip {roundtrip:.3e}");
        for &t in &[-15.0, -3.2, 0.0, 1.7, 12.0] {
            let got = measure.density_at(t)[(0, 0)].re;
            assert!(
                (got - expect_density).abs() < 1e-4,
                "{name}: density at {t} is {got}, expected {expect_density}"
            );
        }
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 60.0, "{name}: runtime {elapsed:.1}s");
    }

    // contraction derived from the uniform model
    let start = Instant::now();
    let built = uniform_model();
    let w = ContractiveSampler::from_weyl(built.sampler.unwrap());
    let grid = linspace(-2.0, 2.0, 801);
    let (measure, roundtrip) = realize(&w, &grid, &sched).unwrap();
    assert!(roundtrip < 1e-3, "uniform: roundtrip {roundtrip:.3e}");
    for &t in &[-0.7, 0.0, 0.6] {
        let got = measure.density_at(t)[(0, 0)].re;
        assert!((got - 1.0).abs() < 1e-3, "uniform: density at {t} is {got}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "uniform: runtime {elapsed:.1}s");
    println!("criterion 7 (full inverse pipeline): PASS");
}

#[test]
fn criterion_8_inner_function_detection() {
    let atomic = build_model(&ModelSpec::Atomic {
        dim: 1,
        atoms: vec![AtomParam {
            t: 0.0,
            weight: vec![vec![[1.0, 0.0]]],
        }],
    })
    .unwrap();
    let w = atomic.contraction.unwrap();
    let sched = BoundarySchedule::default();

    let boundary_grid = linspace(-2.0, 2.0, 41);
    let report = check_admissibility(&w, &default_y_ladder(), 8, &boundary_grid, &sched, 88)
        .unwrap();
    assert!(report.inner_flag, "inner flag not set: {:?}", report.inner_defects);

    let (recovered, _) = realize(&w, &linspace(-2.0, 2.0, 401), &sched).unwrap();
    assert_eq!(recovered.atoms().len(), 1);
    assert!(recovered.atoms()[0].position.abs() < 1e-6);
    // density mass must be negligible for an inner function
    let mass = recovered.weighted_mass().unwrap()[(0, 0)].re
        - recovered.atoms()[0].weight[(0, 0)].re;
    assert!(mass.abs() < 1e-6, "a.c. mass {mass:.3e}");

    // forward pipeline on the recovered model: trivial fibers away from the atom
    let sampler = WeylSampler::from_measure(recovered);
    let grid: Vec<f64> = linspace(-2.0, 2.0, 201)
        .into_iter()
        .filter(|t| t.abs() > 0.05)
        .collect();
    let rows = scattering_sweep(&sampler, &grid, &sched, DEFAULT_RTOL).unwrap();
    let rank0 = rows
        .iter()
        .filter(|r| r.status == SampleStatus::Ok && r.rank == 0)
        .count();
    assert!(
        rank0 as f64 >= 0.95 * rows.len() as f64,
        "rank-0 fibers at {rank0}/{} points",
        rows.len()
    );
    println!("criterion 8 (inner-function detection): PASS");
}

#[test]
fn criterion_9_admissibility_conditions() {
    let sched = BoundarySchedule::default();
    let grid = linspace(-2.0, 2.0, 21);

    let zero = ContractiveSampler::constant(identity(1) * Complex64::new(0.0, 0.0)).unwrap();
    let report = check_admissibility(&zero, &default_y_ladder(), 8, &grid, &sched, 99).unwrap();
    assert!(report.passes_strict_contraction());
    assert!(report.passes_growth());
    assert!(report.all_probes_diverging());
    assert!(!report.inner_flag);

    let unitary = ContractiveSampler::constant(identity(1)).unwrap();
    let report_u =
        check_admissibility(&unitary, &default_y_ladder(), 2, &grid, &sched, 99).unwrap();
    assert!(!report_u.passes_strict_contraction());

    // determinism under a fixed seed
    let again = check_admissibility(&zero, &default_y_ladder(), 8, &grid, &sched, 99).unwrap();
    assert_eq!(report, again);
    let json_a = serde_json::to_string(&report).unwrap();
    let json_b = serde_json::to_string(&again).unwrap();
    assert_eq!(json_a, json_b);
    println!("criterion 9 (admissibility conditions): PASS");
}
