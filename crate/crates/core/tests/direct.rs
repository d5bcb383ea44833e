use std::f64::consts::PI;

use dirac_inverse::direct::{
    char_matrix, find_eigenvalues, norming_matrix_residue, norming_matrix_s, norming_matrix_t, solve_cauchy_s,
    solve_cauchy_t, spectral_data, weyl_function, Potential, SPotential, SProblem, SolverOptions, SpectralWindow,
    TProblem,
};
use dirac_inverse::matcore::{hermitian_eigen, identity, max_abs, op_norm, ComplexMatrix, C0, C1, CI};
use dirac_inverse::random::{haar_unitary, SmoothMatrixFunction};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn diag(v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
}

fn constant_closed_form(cst: f64, lambda: f64, x: f64) -> ComplexMatrix {
    let w = Complex64::new(lambda * lambda - cst * cst, 0.0).sqrt();
    let (cos, sinc) = if w.norm() < 1e-14 {
        (C1, c(x))
    } else {
        ((w * x).cos(), (w * x).sin() / w)
    };
    let b = ComplexMatrix::from_row_slice(2, 2, &[c(lambda), c(-cst), c(cst), c(-lambda)]);
    identity(2) * cos + b * (CI * sinc)
}

/// `V` for a real constant scalar potential `q = c`.
fn constant_s_potential(cst: f64, intervals: usize) -> SPotential {
    SPotential::from_fn(intervals, |_| {
        ComplexMatrix::from_row_slice(2, 2, &[C0, c(cst), c(cst), C0])
    })
    .unwrap()
}

#[test]
fn free_cauchy_solution_is_diagonal_exponential() {
    let q = Potential::zero(2, 16).unwrap();
    let lambda = 2.3;
    let y = solve_cauchy_t(&q, c(lambda));
    assert_eq!(y.values[8], identity(4));
    for (x, v) in y.xs.iter().zip(&y.values) {
        let e = (CI * lambda * *x).exp();
        let expected = diag(&[e, e, e.conj(), e.conj()]);
        assert!(max_abs(&(v - expected)) < 1e-13);
    }
}

#[test]
fn constant_potential_matches_matrix_exponential() {
    for cst in [0.25, 0.5, 1.0] {
        let q = Potential::constant(ComplexMatrix::from_element(1, 1, c(cst)), 8).unwrap();
        for lambda in [0.1, 0.7, 3.0, 11.5] {
            let y = solve_cauchy_t(&q, c(lambda));
            for (x, v) in y.xs.iter().zip(&y.values) {
                let err = max_abs(&(v - constant_closed_form(cst, lambda, *x)));
                assert!(err < 1e-12, "c={cst} lambda={lambda} x={x} err={err}");
            }
        }
    }
}

#[test]
fn integrator_is_fourth_order_on_variable_potentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = SmoothMatrixFunction::random(1, 1.0, &mut rng);
    let q = Potential::from_fn(8, |x| f.eval(x)).unwrap();
    let endpoint = |substeps: usize| {
        let opts = SolverOptions {
            substeps,
            ..SolverOptions::default()
        };
        TProblem::new(&q, &identity(2), &opts).unwrap().boundary_matrix(c(6.0))
    };
    let reference = endpoint(256);
    let errors: Vec<f64> = [1, 2, 4, 8].iter().map(|&k| max_abs(&(endpoint(k) - &reference))).collect();
    for w in errors.windows(2) {
        assert!(w[0] / w[1] >= 12.0, "{errors:?}");
    }
}

#[test]
fn free_auxiliary_solutions_match_closed_forms() {
    let v = SPotential::zero(2, 8).unwrap();
    let zeta = Complex64::new(1.7, 0.3);
    let (phi, psi) = solve_cauchy_s(&v, zeta);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (i, x) in phi.xs.iter().enumerate() {
        let e = (CI * zeta * *x).exp();
        let em = (-CI * zeta * *x).exp();
        let p = &phi.values[i];
        let q = &psi.values[i];
        for k in 0..2 {
            assert!((p[(k, k)] - e * s / CI).norm() < 1e-13);
            assert!((p[(2 + k, k)] - em * s / CI).norm() < 1e-13);
            assert!((q[(k, k)] - e * s).norm() < 1e-13);
            assert!((q[(2 + k, k)] + em * s).norm() < 1e-13);
        }
    }
    let init = phi.values[0].clone();
    let expected = ComplexMatrix::from_fn(4, 2, |i, j| if i % 2 == j { Complex64::new(0.0, -s) } else { C0 });
    assert_eq!(init, expected);
}

#[test]
fn free_characteristic_matrix() {
    let v = SPotential::zero(2, 8).unwrap();
    let id = identity(2);
    assert!(max_abs(&char_matrix(&v, &id, c(0.0)).unwrap()) < 1e-15);
    assert!(max_abs(&(char_matrix(&v, &id, c(PI / 2.0)).unwrap() - &id)) < 1e-14);

    let u = haar_unitary(2, &mut ChaCha8Rng::seed_from_u64(11));
    let sqrt = dirac_inverse::matcore::principal_sqrt_unitary(&u).unwrap();
    let zeta = c(0.83);
    let expected = (sqrt.adjoint() * (CI * zeta).exp() - &sqrt * (-CI * zeta).exp()) / (CI * 2.0);
    assert!(max_abs(&(char_matrix(&v, &u, zeta).unwrap() - expected)) < 1e-13);
}

#[test]
fn free_weyl_function_is_minus_cotangent() {
    let v = SPotential::zero(2, 8).unwrap();
    for zeta in [c(0.4), Complex64::new(1.1, 0.5), c(PI / 2.0)] {
        let m = weyl_function(&v, &identity(2), zeta).unwrap();
        let expected = identity(2) * (-zeta.cos() / zeta.sin());
        assert!(max_abs(&(m - expected)) < 1e-12);
    }
    assert!(weyl_function(&v, &identity(2), c(0.0)).is_err());
}

#[test]
fn weyl_function_is_herglotz() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = SmoothMatrixFunction::random(2, 1.0, &mut rng);
    let v = SPotential::from_fn(64, |x| f.eval(x)).unwrap();
    let u = haar_unitary(2, &mut rng);
    let problem = SProblem::new(&v, &u, &SolverOptions::default()).unwrap();
    for k in 0..20 {
        let zeta = Complex64::new(-10.0 + k as f64, 0.3);
        let m = problem.weyl(zeta).unwrap();
        let im = (&m - m.adjoint()) / (CI * 2.0);
        let (values, _) = hermitian_eigen(&im);
        assert!(values[0] >= -1e-8, "zeta={zeta} min eig {}", values[0]);
    }
}

#[test]
fn free_eigenvalues_are_found() {
    let v = SPotential::zero(2, 8).unwrap();
    let u = diag(&[C1, -C1]);
    let roots = find_eigenvalues(&v, &u, SpectralWindow { lo: -PI, hi: PI }).unwrap();
    let expected = [-PI, -PI / 2.0, 0.0, PI / 2.0];
    assert_eq!(roots.len(), 4);
    for (root, e) in roots.iter().zip(expected) {
        assert!((root.zeta - e).abs() < 1e-10);
        assert_eq!(root.mult, 1);
    }
    let roots = find_eigenvalues(&v, &identity(2), SpectralWindow { lo: -PI / 2.0, hi: 1.5 * PI }).unwrap();
    assert_eq!(roots.len(), 2);
    assert!(roots[0].zeta.abs() < 1e-10 && roots[0].mult == 2);
    assert!((roots[1].zeta - PI).abs() < 1e-10 && roots[1].mult == 2);
}

#[test]
fn antiperiodic_free_spectrum() {
    let q = Potential::zero(1, 8).unwrap();
    let t = TProblem::new(&q, &identity(2), &SolverOptions::default()).unwrap();
    let roots = t.eigenvalues(-3.0 * PI, 3.0 * PI).unwrap();
    assert_eq!(roots.len(), 6);
    for (k, root) in roots.iter().enumerate() {
        let expected = PI / 2.0 + PI * (k as f64 - 3.0);
        assert!((root.zeta - expected).abs() < 1e-10);
        assert_eq!(root.mult, 2);
    }
}

#[test]
fn free_norming_matrices() {
    let q = Potential::zero(1, 8).unwrap();
    let a = norming_matrix_t(&q, &identity(2), PI / 2.0).unwrap();
    assert!(max_abs(&(a.a - identity(2))) < 1e-10);
    assert_eq!(a.mult, 2);

    let refl = diag(&[C1, -C1]);
    let simple = norming_matrix_t(&q, &refl, PI / 2.0).unwrap();
    assert_eq!(simple.mult, 1);
    let (values, _) = hermitian_eigen(&simple.a);
    assert!(values[0].abs() < 1e-10 && (values[1] - 1.0).abs() < 1e-10);
    assert!(norming_matrix_t(&q, &refl, 0.3).is_err());

    let v = SPotential::zero(2, 8).unwrap();
    let cj = norming_matrix_s(&v, &(-identity(2)), PI / 2.0).unwrap();
    assert!(max_abs(&(cj.a - identity(2))) < 1e-10);

    let res = norming_matrix_residue(&v, &identity(2), 0.0, 0.5).unwrap();
    assert!(max_abs(&(res - identity(2))) < 1e-12);
}

#[test]
fn free_spectral_data_carries_eigenprojectors() {
    let v = SPotential::zero(2, 8).unwrap();
    let u = diag(&[C1, -C1]);
    let data = spectral_data(&v, &u, SpectralWindow { lo: -1.6, hi: 1.6 }).unwrap();
    assert_eq!(data.len(), 3);
    let p1 = diag(&[C1, C0]);
    let p2 = diag(&[C0, C1]);
    assert!(max_abs(&(&data.data[0].a - &p2)) < 1e-10);
    assert!(max_abs(&(&data.data[1].a - &p1)) < 1e-10);
    assert!(max_abs(&(&data.data[2].a - &p2)) < 1e-10);
    assert_eq!(data.first_index(), 0);
    assert_eq!(data.get(1).unwrap().lambda, 0.0);

    let full = spectral_data(&v, &identity(2), SpectralWindow { lo: -7.0, hi: 7.0 }).unwrap();
    for d in &full.data {
        assert!(max_abs(&(&d.a - identity(2))) < 1e-10);
    }
}

#[test]
fn norming_definitions_agree_on_smooth_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let f = SmoothMatrixFunction::random(2, 1.0, &mut rng);
    let v = SPotential::from_fn(128, |x| f.eval(x)).unwrap();
    let u = haar_unitary(2, &mut rng);
    let problem = SProblem::new(&v, &u, &SolverOptions::default()).unwrap();
    let roots = problem.eigenvalues(-6.0, 6.0).unwrap();
    assert!(roots.len() >= 6);
    for (i, root) in roots.iter().enumerate() {
        let details = problem.norming(root.zeta).unwrap();
        let gap = [i.checked_sub(1).map(|k| roots[k].zeta), roots.get(i + 1).map(|r| r.zeta)]
            .iter()
            .flatten()
            .map(|z| (z - root.zeta).abs())
            .fold(f64::INFINITY, f64::min);
        let res = problem.residue(root.zeta, 0.4 * gap).unwrap();
        let half = problem.residue(root.zeta, 0.2 * gap).unwrap();
        assert!(op_norm(&(&res - &details.datum.a)) < 1e-6);
        assert!(op_norm(&(&res - &half)) < 1e-8);
        let (values, _) = hermitian_eigen(&details.datum.a);
        assert!(values[0] > -1e-10);
        // D_j = -2 J a^* C_j a J
        let a = dirac_inverse::direct::a_matrix(2);
        let j = dirac_inverse::direct::j_matrix(2);
        let back = &j * a.adjoint() * &details.datum.a * &a * &j * c(-2.0);
        assert!(max_abs(&(back - details.doubled.unwrap())) < 1e-8);
    }
}

/// Boundary matrix of the operator on `[-1, 1]` built from the closed form.
fn closed_form_boundary(cst: f64, u: &ComplexMatrix, lambda: f64) -> Complex64 {
    let p1 = diag(&[C1, C0]);
    let p2 = diag(&[C0, C1]);
    let a = &p2 + u * &p1;
    let b = &p1 + u * &p2;
    (a * constant_closed_form(cst, lambda, -1.0) + b * constant_closed_form(cst, lambda, 1.0)).determinant()
}

fn newton_root<F: Fn(f64) -> Complex64>(f: F, mut x: f64) -> f64 {
    for _ in 0..50 {
        let h = 1e-6;
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        let step = (f(x) / d).re;
        x -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    x
}

#[test]
fn constant_potential_eigenvalues_match_closed_form_roots() {
    let u = haar_unitary(2, &mut ChaCha8Rng::seed_from_u64(8));
    let t_side = -u.clone();
    for cst in [0.25, 0.5, 1.0] {
        let v = constant_s_potential(cst, 64);
        let roots = find_eigenvalues(&v, &u, SpectralWindow { lo: -10.0, hi: 10.0 }).unwrap();
        for root in &roots {
            let exact = newton_root(|l| closed_form_boundary(cst, &t_side, l), root.zeta);
            assert!((exact - root.zeta).abs() < 1e-8, "c={cst}: {} vs {exact}", root.zeta);
        }
        // every sign change of the closed-form minimum modulus is accounted for
        let samples: Vec<f64> = (0..=20000).map(|i| -10.0 + i as f64 * 1e-3).collect();
        let values: Vec<f64> = samples.iter().map(|&l| closed_form_boundary(cst, &t_side, l).norm()).collect();
        let minima = (1..samples.len() - 1)
            .filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1] && values[i] < 1e-2)
            .count();
        assert_eq!(minima, roots.len(), "c={cst}");
    }
}
