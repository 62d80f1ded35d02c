//! Quantum work statistics for driven finite-dimensional systems.
//!
//! Two notions of work are implemented side by side:
//!
//! * the two-time energy measurement (TTM) protocol, whose work distribution
//!   satisfies the standard Jarzynski identity `<exp(-beta W)> = exp(-beta dF)`;
//! * the measurement-free (MF) definition, built from energy expectations of
//!   time-evolved initial eigenstates, for which
//!   `<exp(-beta W)> = exp(-beta dF) exp(-S)` with `S` the relative entropy
//!   between the pseudo-Gibbs and true Gibbs final states.
//!
//! The parametric harmonic oscillator is provided both in closed form and as a
//! truncated Fock-basis model so the two can be cross-checked.

pub mod error;
pub mod hamiltonians;
pub mod linalg;
pub mod oscillator;
pub mod propagation;
pub mod random;
pub mod thermo;
pub mod work;

pub use error::{Error, Result};
pub use hamiltonians::{
    fock_operators, DriveSchedule, FockOperators, HamiltonianModel, PauliAxis, ScheduleShape, TabulatedOperators,
};
pub use linalg::{
    default_group_tol, eig_hermitian, expm_hermitian, ComplexMatrix, HermitianOperator, SpectralDecomposition,
    UnitaryOperator, C64,
};
pub use oscillator::{AdiabaticityMeasure, OscillatorParams, OscillatorSpec, SweepRow};
pub use propagation::{evolve_density, evolve_vector, propagate, PropagatorResult};
pub use thermo::{
    dephase, free_energy, gibbs, measurement_entropy_change, relative_entropy, vn_entropy, DensityMatrix,
    ThermalEnsemble,
};
pub use work::{
    exp_average, mean_work, JointProbabilityTable, Paradigm, PseudoGibbs, WorkAnalysis, WorkAtom, WorkDistribution,
};

pub use nalgebra;
