//! Time-ordered propagators as products of piecewise-constant exponentials.

use nalgebra::{DMatrix, DVector};

use crate::error::{require_positive, Error, Result};
use crate::hamiltonians::{DriveSchedule, HamiltonianModel};
use crate::linalg::{
    check_dims, eigh_real, expm_hermitian, gemm_split, join, split, ComplexMatrix, HermitianOperator, UnitaryOperator,
    C64, UNITARY_TOL,
};
use crate::thermo::DensityMatrix;

pub const DEFAULT_STEPS: usize = 2000;

#[derive(Clone, Debug)]
pub struct PropagatorResult {
    pub unitary: UnitaryOperator,
    pub steps: usize,
    pub unitarity_defect: f64,
    pub hbar: f64,
    /// False when the defect exceeds the requested tolerance; retry with more steps.
    pub within_tolerance: bool,
}

/// `U = prod_k exp(-i dt H(lambda(t_k + dt/2)) / hbar)`, later times to the left.
///
/// Schedules that are constant on `(0, tau]` take a single exponential over the
/// whole duration.
pub fn propagate(
    model: &HamiltonianModel,
    schedule: &DriveSchedule,
    steps: usize,
    hbar: f64,
) -> Result<PropagatorResult> {
    propagate_with_tolerance(model, schedule, steps, hbar, UNITARY_TOL)
}

pub fn propagate_with_tolerance(
    model: &HamiltonianModel,
    schedule: &DriveSchedule,
    steps: usize,
    hbar: f64,
    tolerance: f64,
) -> Result<PropagatorResult> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
        });
    }
    require_positive("hbar", hbar)?;
    let tau = schedule.duration();
    let u = if schedule.is_piecewise_constant() {
        let h = model.evaluate(schedule.lambda_tau())?;
        expm_hermitian(&h, C64::new(0.0, -tau / hbar))
    } else {
        let dt = tau / steps as f64;
        let n = model.dim();
        let mut ur: DMatrix<f64> = DMatrix::identity(n, n);
        let mut ui: DMatrix<f64> = DMatrix::zeros(n, n);
        for k in 0..steps {
            let t_mid = (k as f64 + 0.5) * dt;
            let h = model.evaluate(schedule.value(t_mid))?;
            let (er, ei) = if h.matrix().is_real() {
                real_step(&h, dt / hbar)
            } else {
                split(expm_hermitian(&h, C64::new(0.0, -dt / hbar)).as_matrix())
            };
            (ur, ui) = gemm_split(&er, &ei, &ur, &ui);
        }
        ComplexMatrix::new(join(&ur, &ui))?
    };
    let unitary = UnitaryOperator::unchecked(u);
    let defect = unitary.defect();
    Ok(PropagatorResult {
        unitary,
        steps,
        unitarity_defect: defect,
        hbar,
        within_tolerance: defect <= tolerance,
    })
}

/// `exp(-i theta H)` for real symmetric `H`, as real and imaginary parts `V cos V^T`, `-V sin V^T`.
fn real_step(h: &HermitianOperator, theta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (values, v) = eigh_real(h.as_matrix().map(|z| z.re));
    let mut vc = v.clone();
    let mut vs = v.clone();
    for (j, e) in values.iter().enumerate() {
        let (s, c) = (theta * e).sin_cos();
        vc.column_mut(j).scale_mut(c);
        vs.column_mut(j).scale_mut(-s);
    }
    let vt = v.transpose();
    (vc * &vt, vs * vt)
}

#[derive(Clone, Debug)]
pub struct ConvergedPropagator {
    pub result: PropagatorResult,
    /// `max |U_2n - U_n|` between the last two step counts.
    pub self_convergence: f64,
    pub converged: bool,
}

/// Doubles the step count until successive propagators agree entrywise within `tolerance`
/// or `max_steps` is reached.
pub fn propagate_converged(
    model: &HamiltonianModel,
    schedule: &DriveSchedule,
    initial_steps: usize,
    max_steps: usize,
    hbar: f64,
    tolerance: f64,
) -> Result<ConvergedPropagator> {
    let mut steps = initial_steps.max(1);
    let mut previous = propagate(model, schedule, steps, hbar)?;
    if schedule.is_piecewise_constant() {
        return Ok(ConvergedPropagator {
            result: previous,
            self_convergence: 0.0,
            converged: true,
        });
    }
    loop {
        let next_steps = steps * 2;
        let next = propagate(model, schedule, next_steps, hbar)?;
        let diff = next.unitary.matrix().sub(previous.unitary.matrix())?.max_norm();
        if diff <= tolerance || next_steps * 2 > max_steps {
            return Ok(ConvergedPropagator {
                result: next,
                self_convergence: diff,
                converged: diff <= tolerance,
            });
        }
        previous = next;
        steps = next_steps;
    }
}

/// `U psi`.
pub fn evolve_vector(psi: &DVector<C64>, u: &UnitaryOperator) -> Result<DVector<C64>> {
    check_dims(u.dim(), psi.len())?;
    Ok(u.as_matrix() * psi)
}

/// `U rho U^dagger`.
pub fn evolve_density(rho: &DensityMatrix, u: &UnitaryOperator) -> Result<DensityMatrix> {
    check_dims(u.dim(), rho.dim())?;
    let m = u.as_matrix() * rho.as_matrix() * u.as_matrix().adjoint();
    let h = HermitianOperator::symmetrized(ComplexMatrix::new(m)?);
    Ok(DensityMatrix::from_hermitian_unchecked(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::PauliAxis;
    use crate::linalg::expm_hermitian;
    use std::f64::consts::PI;

    #[test]
    fn constant_schedule_commuting_case() {
        let model = HamiltonianModel::custom(
            crate::hamiltonians::TabulatedOperators::new(vec![(0.0, HermitianOperator::diagonal(&[0.0, 1.0]))])
                .unwrap(),
        );
        let schedule = DriveSchedule::constant(PI, 0.0).unwrap();
        for steps in [1, 7, 100] {
            let r = propagate(&model, &schedule, steps, 1.0).unwrap();
            let expect = ComplexMatrix::from_diagonal(&[1.0, -1.0]);
            assert!(r.unitary.matrix().sub(&expect).unwrap().max_norm() < 1e-12);
            assert!(r.within_tolerance);
        }
    }

    #[test]
    fn sudden_schedule_is_single_exponential() {
        let model = HamiltonianModel::two_level(0.7, PauliAxis::Z).unwrap();
        let schedule = DriveSchedule::sudden(1.3, -1.0, 2.0).unwrap();
        let expect = expm_hermitian(&model.evaluate(2.0).unwrap(), C64::new(0.0, -1.3 / 0.8));
        for steps in [1, 5, 1000] {
            let r = propagate(&model, &schedule, steps, 0.8).unwrap();
            assert_eq!(r.unitary.matrix(), &expect);
        }
    }

    #[test]
    fn two_level_ramp_self_convergence() {
        let model = HamiltonianModel::two_level(0.5, PauliAxis::Z).unwrap();
        let schedule = DriveSchedule::linear(3.0, -2.0, 2.0).unwrap();
        let coarse = propagate(&model, &schedule, 1000, 1.0).unwrap();
        let fine = propagate(&model, &schedule, 10_000, 1.0).unwrap();
        let diff = coarse.unitary.matrix().sub(fine.unitary.matrix()).unwrap().max_norm();
        assert!(diff <= 1e-6, "diff = {diff}");
        assert!(coarse.unitarity_defect < 1e-12);
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let model = HamiltonianModel::two_level(0.5, PauliAxis::Z).unwrap();
        let schedule = DriveSchedule::smoothstep(2.0, -1.0, 3.0).unwrap();
        let reference = propagate(&model, &schedule, 64_000, 1.0).unwrap();
        let err = |n| {
            let r = propagate(&model, &schedule, n, 1.0).unwrap();
            r.unitary.matrix().sub(reference.unitary.matrix()).unwrap().max_norm()
        };
        let (e1, e2) = (err(100), err(200));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.2, "ratio = {ratio}");
    }

    #[test]
    fn auto_doubling_reaches_tolerance() {
        let model = HamiltonianModel::two_level(0.5, PauliAxis::Z).unwrap();
        let schedule = DriveSchedule::linear(1.0, 0.0, 1.0).unwrap();
        let c = propagate_converged(&model, &schedule, 50, 1 << 20, 1.0, 1e-8).unwrap();
        assert!(c.converged);
        assert!(c.self_convergence <= 1e-8);
    }

    #[test]
    fn evolve_basics() {
        let sx = ComplexMatrix::new(PauliAxis::X.matrix()).unwrap();
        let u = UnitaryOperator::new(sx).unwrap();
        let rho = DensityMatrix::pure(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])).unwrap();
        let out = evolve_density(&rho, &u).unwrap();
        let expect = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        assert!(out.matrix().sub(&expect).unwrap().max_norm() < 1e-15);

        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(evolve_density(&mixed, &u).unwrap().as_matrix(), mixed.as_matrix());

        let psi = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let out = evolve_vector(&psi, &u).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-15);
        assert!(evolve_vector(&DVector::zeros(3), &u).is_err());
    }
}
