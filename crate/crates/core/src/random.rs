//! Seeded random instances for property checks and the verification batch.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hamiltonians::{DriveSchedule, HamiltonianModel, ScheduleShape};
use crate::linalg::{
    eig_hermitian, expm_hermitian, ComplexMatrix, HermitianOperator, SpectralDecomposition, UnitaryOperator, C64,
};
use crate::thermo::DensityMatrix;

/// Deterministic generator used throughout; identical seeds give identical streams on every platform.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Hermitian matrix with entries uniform in the unit square, scaled so the
/// spectral norm equals `norm`.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, norm: f64) -> HermitianOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| uniform_complex(rng));
    let h = HermitianOperator::symmetrized(ComplexMatrix::from_raw(g));
    let spec = eig_hermitian(&h, None);
    let ev = spec.eigenvalues();
    let radius = ev[0].abs().max(ev[ev.len() - 1].abs());
    let scale = if radius > 0.0 { norm / radius } else { 1.0 };
    HermitianOperator::symmetrized(h.matrix().scale(C64::new(scale, 0.0)))
}

/// Full-rank density matrix `G G^dagger / trace`.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| uniform_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(m / C64::new(tr, 0.0)).expect("Gram matrix is a density matrix")
}

pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> UnitaryOperator {
    let h = random_hermitian(rng, dim, std::f64::consts::PI);
    UnitaryOperator::new(expm_hermitian(&h, C64::new(0.0, 1.0))).expect("exponential of i H is unitary")
}

/// Eigenbasis of a random Hermitian matrix.
pub fn random_basis<R: Rng>(rng: &mut R, dim: usize) -> SpectralDecomposition {
    eig_hermitian(&random_hermitian(rng, dim, 1.0), None)
}

/// Schedule on `lambda in [0, 1]` with a randomly chosen shape and duration.
pub fn random_schedule<R: Rng>(rng: &mut R) -> DriveSchedule {
    let duration = rng.random_range(0.2..3.0);
    match rng.random_range(0..4) {
        0 => DriveSchedule::linear(duration, 0.0, 1.0),
        1 => DriveSchedule::smoothstep(duration, 0.0, 1.0),
        2 => DriveSchedule::sudden(duration, 0.0, 1.0),
        _ => {
            let inner = rng.random_range(1..4);
            let mut times: Vec<f64> = (0..inner).map(|_| rng.random_range(0.05..0.95) * duration).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            let mut knots = vec![(0.0, 0.0)];
            knots.extend(times.into_iter().map(|t| (t, rng.random_range(0.0..1.0))));
            knots.push((duration, 1.0));
            DriveSchedule::ramp(ScheduleShape::Tabulated(knots), duration, 0.0, 1.0)
        }
    }
    .expect("valid random schedule")
}

/// A driven protocol interpolating between two random Hamiltonians.
#[derive(Clone, Debug)]
pub struct RandomProtocol {
    pub beta: f64,
    pub h0: HermitianOperator,
    pub h_tau: HermitianOperator,
    pub model: HamiltonianModel,
    pub schedule: DriveSchedule,
}

/// Dimension drawn from `dims`, `beta` from `betas`; Hamiltonians have unit spectral norm.
pub fn random_protocol<R: Rng>(
    rng: &mut R,
    dims: std::ops::RangeInclusive<usize>,
    betas: std::ops::RangeInclusive<f64>,
) -> RandomProtocol {
    let dim = rng.random_range(dims);
    let beta = rng.random_range(betas);
    let h0 = random_hermitian(rng, dim, 1.0);
    let h_tau = random_hermitian(rng, dim, 1.0);
    let model = HamiltonianModel::interpolating(h0.clone(), h_tau.clone()).expect("same dimension");
    let schedule = random_schedule(rng);
    RandomProtocol {
        beta,
        h0,
        h_tau,
        model,
        schedule,
    }
}
