use proptest::prelude::*;

use qwork_core::hamiltonians::{HamiltonianModel, PauliAxis};
use qwork_core::linalg::{eig_hermitian, expm_hermitian, ComplexMatrix, HermitianOperator, C64};
use qwork_core::random::{random_basis, random_density, random_hermitian, seeded};
use qwork_core::thermo::{dephase, measurement_entropy_change, relative_entropy, vn_entropy};

fn hermitian(seed: u64, dim: usize) -> HermitianOperator {
    random_hermitian(&mut seeded(seed), dim, 1.0 + (seed % 7) as f64)
}

/// Eigenvalues of a real symmetric 3x3 matrix from the trigonometric cubic formula.
fn cubic_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b: Vec<f64> = (0..9)
        .map(|k| {
            let (i, j) = (k / 3, k % 3);
            (a[i][j] - if i == j { q } else { 0.0 }) / p
        })
        .collect();
    let det =
        b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6]) + b[2] * (b[3] * b[7] - b[4] * b[6]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e3, 3.0 * q - e1 - e3, e1]
}

#[test]
fn three_by_three_matches_cubic_formula() {
    let a = [[2.0, -1.0, 0.5], [-1.0, 0.3, 0.7], [0.5, 0.7, -1.2]];
    let flat: Vec<f64> = a.iter().flatten().copied().collect();
    let h = HermitianOperator::from_real_symmetric(&nalgebra::DMatrix::from_row_slice(3, 3, &flat)).unwrap();
    let spec = eig_hermitian(&h, None);
    for (x, y) in spec.eigenvalues().iter().zip(cubic_eigenvalues(&a)) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn two_level_matches_quadratic_formula() {
    let model = HamiltonianModel::two_level(0.4, PauliAxis::Z).unwrap();
    let spec = eig_hermitian(&model.evaluate(1.0).unwrap(), None);
    let r = 0.5 * (1.0f64 + 0.16).sqrt();
    assert!((spec.eigenvalues()[0] + r).abs() < 1e-14);
    assert!((spec.eigenvalues()[1] - r).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), dim in 1usize..9) {
        let h = hermitian(seed, dim);
        let spec = eig_hermitian(&h, None);
        let back = spec.reconstruct();
        prop_assert!(back.matrix().sub(h.matrix()).unwrap().max_norm() <= 1e-10 * (1.0 + h.matrix().max_norm()));
    }

    #[test]
    fn projectors_are_complete_and_orthogonal(seed in any::<u64>(), dim in 1usize..9) {
        let spec = eig_hermitian(&hermitian(seed, dim), None);
        let ps = spec.projectors();
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, p) in ps.iter().enumerate() {
            sum = sum.add(p).unwrap();
            for (j, q) in ps.iter().enumerate() {
                let pq = p.multiply(q).unwrap();
                let expected = if i == j { p.clone() } else { ComplexMatrix::zeros(dim) };
                prop_assert!(pq.sub(&expected).unwrap().max_norm() < 1e-12);
            }
        }
        prop_assert!(sum.sub(&ComplexMatrix::identity(dim)).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn imaginary_exponential_is_unitary(seed in any::<u64>(), dim in 1usize..9, t in -20.0f64..20.0) {
        let u = expm_hermitian(&hermitian(seed, dim), C64::new(0.0, t));
        prop_assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn dephasing_is_idempotent_and_conserves_energy(seed in any::<u64>(), dim in 1usize..9) {
        let mut rng = seeded(seed);
        let rho = random_density(&mut rng, dim);
        let h = random_hermitian(&mut rng, dim, 1.0);
        let spec = eig_hermitian(&h, None);
        let once = dephase(&rho, &spec).unwrap();
        let twice = dephase(&once, &spec).unwrap();
        prop_assert!(twice.matrix().sub(once.matrix()).unwrap().max_norm() < 1e-14);
        prop_assert!((once.energy(&h).unwrap() - rho.energy(&h).unwrap()).abs() <= 1e-12);
        prop_assert!(measurement_entropy_change(&rho, &spec).unwrap() >= -1e-10);
    }

    #[test]
    fn relative_entropy_is_non_negative(seed in any::<u64>(), dim in 1usize..9) {
        let mut rng = seeded(seed);
        let a = random_density(&mut rng, dim);
        let b = random_density(&mut rng, dim);
        prop_assert!(relative_entropy(&a, &b).unwrap() >= -1e-10);
        prop_assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-9);
        prop_assert!(vn_entropy(&a) <= (dim as f64).ln() + 1e-10);
    }

    #[test]
    fn degenerate_basis_is_canonical(seed in any::<u64>(), dim in 2usize..7, angle in 0.0f64..std::f64::consts::TAU) {
        let mut rng = seeded(seed);
        let basis = random_basis(&mut rng, dim);
        // Twofold degenerate lowest level, written in a rotated basis.
        let mut energies: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        energies[1] = 0.0;
        let v = basis.basis().clone();
        let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, energies.iter().map(|&e| C64::new(e, 0.0))));
        let mut rotated = v.clone();
        let (s, c) = angle.sin_cos();
        let phase = C64::from_polar(1.0, 0.3 * angle);
        for r in 0..dim {
            rotated[(r, 0)] = v[(r, 0)] * c - v[(r, 1)] * s * phase;
            rotated[(r, 1)] = v[(r, 0)] * s * phase.conj() + v[(r, 1)] * c;
        }
        let h1 = HermitianOperator::from_matrix(&v * &d * v.adjoint()).unwrap();
        let h2 = HermitianOperator::from_matrix(&rotated * &d * rotated.adjoint()).unwrap();
        let first = eig_hermitian(&h1, None);
        let second = eig_hermitian(&h2, None);
        prop_assert_eq!(first.multiplicities()[0], 2);
        let diff = (first.basis() - second.basis()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9, "basis differs by {}", diff);
    }

    #[test]
    fn model_evaluations_are_hermitian(lambda in -5.0f64..5.0, delta in 0.0f64..3.0) {
        let m = HamiltonianModel::two_level(delta, PauliAxis::Y).unwrap();
        let h = m.evaluate(lambda).unwrap();
        prop_assert!(h.matrix().hermiticity_defect() < 1e-15);
    }
}
