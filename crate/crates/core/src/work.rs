//! Work distributions under the two-time measurement (TTM) and the
//! measurement-free (MF) paradigms, and the fluctuation identities and bounds
//! built from them.
//!
//! The TTM work of a realisation is the difference between the measured final
//! and initial energy eigenvalues. The MF work of an initial eigenstate
//! `|n0>` is the change of its energy expectation under the evolution,
//! `<n0|U^dagger H_tau U|n0> - eps(n0)`, weighted by the initial thermal
//! occupation. Both give the same mean work; their exponential averages differ
//! by the relative entropy between the pseudo-Gibbs state built on the evolved
//! eigenbasis and the true final Gibbs state.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    check_dims, eig_hermitian, weighted_outer, ComplexMatrix, HermitianOperator, SpectralDecomposition,
    UnitaryOperator, C64,
};
use crate::propagation::evolve_density;
use crate::thermo::{gibbs, measurement_entropy_change, relative_entropy_to_thermal, DensityMatrix, ThermalEnsemble};

/// Label recorded in reports for how degenerate initial eigenspaces are resolved into vectors.
pub const BASIS_CONVENTION: &str = "pivoted-gram-schmidt";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Paradigm {
    #[serde(rename = "TTM")]
    TwoTimeMeasurement,
    #[serde(rename = "MF")]
    MeasurementFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorkAtom {
    pub work: f64,
    pub probability: f64,
}

/// Finite list of point masses, sorted by work value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorkDistribution {
    atoms: Vec<WorkAtom>,
    paradigm: Paradigm,
}

fn merge_tol(w: f64) -> f64 {
    1e-12 * (1.0 + w.abs())
}

impl WorkDistribution {
    /// Sorts the atoms, merges those closer than `1e-12 (1 + |w|)` and drops
    /// exact zeros. Probabilities must be non-negative up to rounding.
    pub fn from_atoms(raw: impl IntoIterator<Item = (f64, f64)>, paradigm: Paradigm) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = raw.into_iter().collect();
        for &(w, p) in &raw {
            if !w.is_finite() || !p.is_finite() || p < -1e-12 {
                return Err(Error::InvalidParameter {
                    name: "atom",
                    value: if w.is_finite() { p } else { w },
                });
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<WorkAtom> = Vec::with_capacity(raw.len());
        for (w, p) in raw {
            let p = p.max(0.0);
            if p == 0.0 {
                continue;
            }
            match atoms.last_mut() {
                Some(last) if (w - last.work).abs() <= merge_tol(last.work) => last.probability += p,
                _ => atoms.push(WorkAtom {
                    work: w,
                    probability: p,
                }),
            }
        }
        Ok(Self { atoms, paradigm })
    }

    pub fn atoms(&self) -> &[WorkAtom] {
        &self.atoms
    }

    pub fn paradigm(&self) -> Paradigm {
        self.paradigm
    }

    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability).sum()
    }
}

/// `<W> = sum_w p(w) w`.
pub fn mean_work(d: &WorkDistribution) -> f64 {
    d.atoms.iter().map(|a| a.probability * a.work).sum()
}

/// `ln <exp(-beta W)>`, evaluated with the largest exponent factored out.
pub fn ln_exp_average(d: &WorkDistribution, beta: f64) -> f64 {
    let shift = d.atoms.iter().map(|a| -beta * a.work).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = d
        .atoms
        .iter()
        .map(|a| a.probability * (-beta * a.work - shift).exp())
        .sum();
    shift + sum.ln()
}

/// `<exp(-beta W)>`.
pub fn exp_average(d: &WorkDistribution, beta: f64) -> f64 {
    ln_exp_average(d, beta).exp()
}

/// Joint probabilities `p(n0; n_tau)` of the two energy measurements, indexed
/// by initial level (rows) and final level (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct JointProbabilityTable {
    probs: DMatrix<f64>,
}

impl JointProbabilityTable {
    pub fn probabilities(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn get(&self, initial: usize, fin: usize) -> f64 {
        self.probs[(initial, fin)]
    }

    pub fn total(&self) -> f64 {
        self.probs.sum()
    }

    /// Probability of each initial level.
    pub fn row_marginals(&self) -> Vec<f64> {
        self.probs.row_iter().map(|r| r.sum()).collect()
    }

    /// Probability of each final level.
    pub fn column_marginals(&self) -> Vec<f64> {
        self.probs.column_iter().map(|c| c.sum()).collect()
    }

    /// `p(n_tau | n0)`: each row divided by its marginal. Rows with zero
    /// marginal are left at zero.
    pub fn conditional(&self) -> DMatrix<f64> {
        let mut out = self.probs.clone();
        for (i, m) in self.row_marginals().into_iter().enumerate() {
            if m > 0.0 {
                out.row_mut(i).scale_mut(1.0 / m);
            }
        }
        out
    }
}

/// `p(n0; n_tau) = trace(Pi_{n_tau} U Pi_{n0} rho0 Pi_{n0} U^dagger)`.
pub fn ttm_joint(
    rho0: &DensityMatrix,
    u: &UnitaryOperator,
    spec0: &SpectralDecomposition,
    spec_tau: &SpectralDecomposition,
) -> Result<JointProbabilityTable> {
    let n = rho0.dim();
    check_dims(n, u.dim())?;
    check_dims(n, spec0.dim())?;
    check_dims(n, spec_tau.dim())?;
    // Transition amplitudes between initial and final eigenvectors, and rho0 in the initial basis.
    let amp = spec_tau.basis().adjoint() * u.as_matrix() * spec0.basis();
    let r = spec0.basis().adjoint() * rho0.as_matrix() * spec0.basis();
    let final_levels = spec_tau.level_of_state();
    let mut probs = DMatrix::zeros(spec0.num_levels(), spec_tau.num_levels());
    for level in 0..spec0.num_levels() {
        let range = spec0.level_range(level);
        let a = amp.columns(range.start, range.len());
        let block = r.view((range.start, range.start), (range.len(), range.len()));
        let c = a * block;
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..range.len() {
                acc += c[(k, j)] * a[(k, j)].conj();
            }
            probs[(level, final_levels[k])] += acc.re;
        }
    }
    Ok(JointProbabilityTable { probs })
}

/// Atoms at `eps(n_tau) - eps(n0)` weighted by the joint table.
pub fn ttm_distribution(
    joint: &JointProbabilityTable,
    spec0: &SpectralDecomposition,
    spec_tau: &SpectralDecomposition,
) -> Result<WorkDistribution> {
    let (rows, cols) = joint.probs.shape();
    check_dims(rows, spec0.num_levels())?;
    check_dims(cols, spec_tau.num_levels())?;
    let atoms = (0..rows).flat_map(|i| {
        (0..cols).map(move |j| (spec_tau.eigenvalues()[j] - spec0.eigenvalues()[i], joint.probs[(i, j)]))
    });
    WorkDistribution::from_atoms(atoms.collect::<Vec<_>>(), Paradigm::TwoTimeMeasurement)
}

/// `<n0|U^dagger H_tau U|n0>` for every initial basis vector.
pub fn evolved_energies(
    u: &UnitaryOperator,
    h_tau: &HermitianOperator,
    spec0: &SpectralDecomposition,
) -> Result<Vec<f64>> {
    check_dims(u.dim(), h_tau.dim())?;
    check_dims(u.dim(), spec0.dim())?;
    let evolved = u.as_matrix() * spec0.basis();
    let h_evolved = h_tau.as_matrix() * &evolved;
    Ok((0..evolved.ncols())
        .map(|j| evolved.column(j).dotc(&h_evolved.column(j)).re)
        .collect())
}

/// MF work values `<n0|U^dagger H_tau U|n0> - eps(n0)`, one per initial basis vector.
pub fn mf_work_values(
    u: &UnitaryOperator,
    h_tau: &HermitianOperator,
    spec0: &SpectralDecomposition,
) -> Result<Vec<f64>> {
    let energies = evolved_energies(u, h_tau, spec0)?;
    Ok(energies
        .into_iter()
        .zip(spec0.state_energies())
        .map(|(e, e0)| e - e0)
        .collect())
}

/// Atoms `(W_n0, p(n0))`.
pub fn mf_distribution(values: &[f64], occupations: &[f64]) -> Result<WorkDistribution> {
    check_dims(values.len(), occupations.len())?;
    WorkDistribution::from_atoms(
        values
            .iter()
            .copied()
            .zip(occupations.iter().copied())
            .collect::<Vec<_>>(),
        Paradigm::MeasurementFree,
    )
}

/// Thermal guess for the final state restricted to the evolved initial eigenbasis.
#[derive(Clone, Debug)]
pub struct PseudoGibbs {
    pub ln_z_tilde: f64,
    /// Normalised weight of each evolved eigenvector `U|n0>`.
    pub weights: Vec<f64>,
    /// `<n0|U^dagger H_tau U|n0>`.
    pub evolved_energies: Vec<f64>,
    pub density: DensityMatrix,
    /// Weighted mean of the evolved energies.
    pub mean_energy: f64,
}

impl PseudoGibbs {
    pub fn z_tilde(&self) -> f64 {
        self.ln_z_tilde.exp()
    }
}

pub fn pseudo_gibbs(
    u: &UnitaryOperator,
    h_tau: &HermitianOperator,
    spec0: &SpectralDecomposition,
    beta: f64,
) -> Result<PseudoGibbs> {
    crate::error::require_positive("beta", beta)?;
    let energies = evolved_energies(u, h_tau, spec0)?;
    let lowest = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = energies.iter().map(|&e| (-beta * (e - lowest)).exp()).collect();
    let sum: f64 = shifted.iter().sum();
    let weights: Vec<f64> = shifted.iter().map(|w| w / sum).collect();
    let evolved = u.as_matrix() * spec0.basis();
    let w: Vec<C64> = weights.iter().map(|&p| C64::new(p, 0.0)).collect();
    let density = DensityMatrix::from_hermitian_unchecked(HermitianOperator::symmetrized(ComplexMatrix::new(
        weighted_outer(&evolved, &w),
    )?));
    let mean_energy = weights.iter().zip(&energies).map(|(p, e)| p * e).sum();
    Ok(PseudoGibbs {
        ln_z_tilde: -beta * lowest + sum.ln(),
        weights,
        evolved_energies: energies,
        density,
        mean_energy,
    })
}

/// Standard Jarzynski identity `<exp(-beta W)>_TTM = Z_tau / Z_0`.
#[derive(Clone, Debug, Serialize)]
pub struct JarzynskiReport {
    pub exp_avg: f64,
    pub z0: f64,
    pub ztau: f64,
    pub delta_f: f64,
    /// `|<exp(-beta W)> Z_0 / Z_tau - 1|`.
    pub jarzynski_residual: f64,
}

/// `<exp(-beta W)>_MF = exp(-beta dF) exp(-S)`.
#[derive(Clone, Debug, Serialize)]
pub struct ModifiedJarzynskiReport {
    pub lhs: f64,
    pub delta_f: f64,
    /// Relative entropy of the pseudo-Gibbs state to the final Gibbs state, from the matrices.
    pub s_rel: f64,
    /// `ln(Z_tau / Z_tilde)`.
    pub s_rel_closed_form: f64,
    /// `|lhs - exp(-beta dF) exp(-s_rel)|`.
    pub residual: f64,
    /// `|s_rel - s_rel_closed_form|`.
    pub closed_form_residual: f64,
    pub z_tilde: f64,
    pub s_rel_infinite: bool,
}

/// Maximum-work bounds with and without the information free energy.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub beta_w: f64,
    pub beta_df: f64,
    pub s_rel: f64,
    pub beta_df_tilde: f64,
    /// `beta <W> - beta dF - S`.
    pub slack19: f64,
    /// `beta <W> - beta dF_tilde`.
    pub slack21: f64,
}

/// `<W>` from both paradigms against `trace(rho_tau H_tau) - trace(rho_0 H_0)`.
#[derive(Clone, Debug, Serialize)]
pub struct FirstLawReport {
    pub mean_work_ttm: f64,
    pub mean_work_mf: f64,
    pub mean_work_direct: f64,
    pub residual: f64,
}

/// Every quantity of a single driven protocol, computed once.
#[derive(Clone, Debug)]
pub struct WorkAnalysis {
    beta: f64,
    initial: ThermalEnsemble,
    final_eq: ThermalEnsemble,
    unitary: UnitaryOperator,
    rho_tau: DensityMatrix,
    joint: JointProbabilityTable,
    ttm: WorkDistribution,
    mf_values: Vec<f64>,
    mf: WorkDistribution,
    pseudo: PseudoGibbs,
    s_rel: f64,
}

impl WorkAnalysis {
    /// Initial Gibbs state of `h0` at `beta`, evolved by `u`, measured against `h_tau`.
    pub fn new(beta: f64, h0: &HermitianOperator, h_tau: &HermitianOperator, u: &UnitaryOperator) -> Result<Self> {
        check_dims(h0.dim(), h_tau.dim())?;
        check_dims(h0.dim(), u.dim())?;
        let initial = gibbs(h0, beta)?;
        let final_eq = gibbs(h_tau, beta)?;
        let spec0 = initial.spectrum();
        let joint = ttm_joint(initial.density(), u, spec0, final_eq.spectrum())?;
        let ttm = ttm_distribution(&joint, spec0, final_eq.spectrum())?;
        let mf_values = mf_work_values(u, h_tau, spec0)?;
        let mf = mf_distribution(&mf_values, &initial.state_occupations())?;
        let pseudo = pseudo_gibbs(u, h_tau, spec0, beta)?;
        let s_rel = relative_entropy_to_thermal(&pseudo.density, &final_eq)?;
        let rho_tau = evolve_density(initial.density(), u)?;
        Ok(Self {
            beta,
            initial,
            final_eq,
            unitary: u.clone(),
            rho_tau,
            joint,
            ttm,
            mf_values,
            mf,
            pseudo,
            s_rel,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn initial(&self) -> &ThermalEnsemble {
        &self.initial
    }

    pub fn final_equilibrium(&self) -> &ThermalEnsemble {
        &self.final_eq
    }

    pub fn unitary(&self) -> &UnitaryOperator {
        &self.unitary
    }

    pub fn rho_tau(&self) -> &DensityMatrix {
        &self.rho_tau
    }

    pub fn joint(&self) -> &JointProbabilityTable {
        &self.joint
    }

    pub fn ttm(&self) -> &WorkDistribution {
        &self.ttm
    }

    /// Per-eigenvector MF work values, unmerged.
    pub fn mf_values(&self) -> &[f64] {
        &self.mf_values
    }

    pub fn mf(&self) -> &WorkDistribution {
        &self.mf
    }

    pub fn pseudo_gibbs(&self) -> &PseudoGibbs {
        &self.pseudo
    }

    /// `dF = F_tau - F_0`.
    pub fn delta_f(&self) -> f64 {
        (self.initial.ln_z() - self.final_eq.ln_z()) / self.beta
    }

    /// Matrix-level `S(rho_tilde || rho_eq)`.
    pub fn s_rel(&self) -> f64 {
        self.s_rel
    }

    pub fn s_rel_closed_form(&self) -> f64 {
        self.final_eq.ln_z() - self.pseudo.ln_z_tilde
    }

    /// Number of initial levels with multiplicity above one.
    pub fn degenerate_initial_levels(&self) -> usize {
        self.initial
            .spectrum()
            .multiplicities()
            .iter()
            .filter(|&&m| m > 1)
            .count()
    }

    /// Entropy produced by measuring energy at the end of the protocol.
    pub fn measurement_entropy_change(&self) -> Result<f64> {
        measurement_entropy_change(&self.rho_tau, self.final_eq.spectrum())
    }

    pub fn jarzynski_report(&self) -> JarzynskiReport {
        let ln_avg = ln_exp_average(&self.ttm, self.beta);
        JarzynskiReport {
            exp_avg: ln_avg.exp(),
            z0: self.initial.z(),
            ztau: self.final_eq.z(),
            delta_f: self.delta_f(),
            jarzynski_residual: (ln_avg + self.initial.ln_z() - self.final_eq.ln_z()).exp_m1().abs(),
        }
    }

    pub fn modified_jarzynski_report(&self) -> ModifiedJarzynskiReport {
        let lhs = exp_average(&self.mf, self.beta);
        let rhs = (-self.beta * self.delta_f() - self.s_rel).exp();
        let closed = self.s_rel_closed_form();
        ModifiedJarzynskiReport {
            lhs,
            delta_f: self.delta_f(),
            s_rel: self.s_rel,
            s_rel_closed_form: closed,
            residual: (lhs - rhs).abs(),
            closed_form_residual: (self.s_rel - closed).abs(),
            z_tilde: self.pseudo.z_tilde(),
            s_rel_infinite: self.s_rel.is_infinite(),
        }
    }

    pub fn bounds_report(&self) -> BoundsReport {
        let beta_w = self.beta * mean_work(&self.mf);
        let beta_df = self.beta * self.delta_f();
        // F_tilde_0 = F_0 because the initial state is its own pseudo-Gibbs state.
        let beta_df_tilde = beta_df + self.s_rel;
        BoundsReport {
            beta_w,
            beta_df,
            s_rel: self.s_rel,
            beta_df_tilde,
            slack19: beta_w - beta_df - self.s_rel,
            slack21: beta_w - beta_df_tilde,
        }
    }

    pub fn first_law_report(&self) -> Result<FirstLawReport> {
        let direct = self.rho_tau.energy(self.final_eq.hamiltonian())? - self.initial.mean_energy();
        let ttm = mean_work(&self.ttm);
        let mf = mean_work(&self.mf);
        Ok(FirstLawReport {
            mean_work_ttm: ttm,
            mean_work_mf: mf,
            mean_work_direct: direct,
            residual: (ttm - direct).abs().max((mf - direct).abs()),
        })
    }
}

/// Convenience: decomposes `h` with the default grouping tolerance.
pub fn spectrum_of(h: &HermitianOperator) -> SpectralDecomposition {
    eig_hermitian(h, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::PauliAxis;
    use crate::linalg::expm_hermitian;

    fn sigma_x_unitary() -> UnitaryOperator {
        UnitaryOperator::new(ComplexMatrix::new(PauliAxis::X.matrix()).unwrap()).unwrap()
    }

    #[test]
    fn distribution_merging_and_mean() {
        let d = WorkDistribution::from_atoms(
            vec![(1.0, 0.25), (-1.0, 0.5), (1.0 + 1e-14, 0.25)],
            Paradigm::MeasurementFree,
        )
        .unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert!((d.total_probability() - 1.0).abs() < 1e-15);
        let sym = WorkDistribution::from_atoms(vec![(1.0, 0.5), (-1.0, 0.5)], Paradigm::MeasurementFree).unwrap();
        assert_eq!(mean_work(&sym), 0.0);
        let zero = WorkDistribution::from_atoms(vec![(0.0, 1.0)], Paradigm::MeasurementFree).unwrap();
        assert_eq!(mean_work(&zero), 0.0);
        assert_eq!(exp_average(&zero, 3.0), 1.0);
    }

    #[test]
    fn exp_average_survives_large_exponents() {
        let d = WorkDistribution::from_atoms(vec![(-800.0, 0.5), (0.0, 0.5)], Paradigm::TwoTimeMeasurement).unwrap();
        let ln = ln_exp_average(&d, 1.0);
        assert!((ln - (800.0 + 0.5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn identity_protocol_joint_is_diagonal() {
        let h = HermitianOperator::diagonal(&[0.0, 0.3, 1.2]);
        let ens = gibbs(&h, 1.3).unwrap();
        let u = UnitaryOperator::identity(3);
        let joint = ttm_joint(ens.density(), &u, ens.spectrum(), ens.spectrum()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { ens.occupations()[i] } else { 0.0 };
                assert!((joint.get(i, j) - expect).abs() < 1e-15);
            }
        }
        let d = ttm_distribution(&joint, ens.spectrum(), ens.spectrum()).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert_eq!(d.atoms()[0].work, 0.0);
        assert!((d.atoms()[0].probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_level_row_marginal_counts_multiplicity() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 1.0]);
        let ens = gibbs(&h, 0.7).unwrap();
        let u = UnitaryOperator::identity(3);
        let joint = ttm_joint(ens.density(), &u, ens.spectrum(), ens.spectrum()).unwrap();
        let rows = joint.row_marginals();
        assert!((rows[1] - 2.0 * ens.occupations()[1]).abs() < 1e-15);
    }

    #[test]
    fn swap_permutes_joint() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]);
        let ens = gibbs(&h, 1.0).unwrap();
        let joint = ttm_joint(ens.density(), &sigma_x_unitary(), ens.spectrum(), ens.spectrum()).unwrap();
        let p = ens.occupations();
        assert!((joint.get(0, 1) - p[0]).abs() < 1e-15);
        assert!((joint.get(1, 0) - p[1]).abs() < 1e-15);
        assert!(joint.get(0, 0).abs() < 1e-15 && joint.get(1, 1).abs() < 1e-15);
    }

    #[test]
    fn relabeled_spectrum_work_values() {
        let h0 = HermitianOperator::diagonal(&[0.0, 1.0]);
        let h1 = HermitianOperator::diagonal(&[0.0, 2.0]);
        let beta = 0.8;
        let a = WorkAnalysis::new(beta, &h0, &h1, &UnitaryOperator::identity(2)).unwrap();
        let atoms = a.ttm().atoms();
        assert_eq!(atoms.len(), 2);
        let z = 1.0 + (-beta).exp();
        assert_eq!(atoms[0].work, 0.0);
        assert!((atoms[0].probability - 1.0 / z).abs() < 1e-15);
        assert_eq!(atoms[1].work, 1.0);
        assert!((atoms[1].probability - (-beta).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn mf_values_shift_and_identity() {
        let h0 = HermitianOperator::diagonal(&[-0.5, 0.2, 0.9]);
        let spec0 = spectrum_of(&h0);
        let u = UnitaryOperator::identity(3);
        assert!(mf_work_values(&u, &h0, &spec0).unwrap().iter().all(|w| w.abs() < 1e-15));
        let shifted = h0.combine(1.0, &HermitianOperator::identity(3), 0.37).unwrap();
        assert!(mf_work_values(&u, &shifted, &spec0)
            .unwrap()
            .iter()
            .all(|w| (w - 0.37).abs() < 1e-15));
    }

    #[test]
    fn sudden_two_level_quench_by_hand() {
        // H0 = diag(0, 1), H_tau = [[a, b], [b, c]], U = 1 (instantaneous quench).
        let (a, b, c) = (0.3, 0.45, 1.6);
        let beta = 1.1;
        let h0 = HermitianOperator::diagonal(&[0.0, 1.0]);
        let h1 = HermitianOperator::from_real_symmetric(&DMatrix::from_row_slice(2, 2, &[a, b, b, c])).unwrap();
        // The quench propagator commutes with H_tau, so it drops out of <n0|U^dagger H_tau U|n0>.
        let u = UnitaryOperator::new(expm_hermitian(&h1, C64::new(0.0, -0.9))).unwrap();
        let spec0 = spectrum_of(&h0);
        let w = mf_work_values(&u, &h1, &spec0).unwrap();
        assert!((w[0] - (a - 0.0)).abs() < 1e-14);
        assert!((w[1] - (c - 1.0)).abs() < 1e-14);
        let pg = pseudo_gibbs(&u, &h1, &spec0, beta).unwrap();
        let z_hand = (-beta * a).exp() + (-beta * c).exp();
        assert!((pg.z_tilde() - z_hand).abs() < 1e-14);
        let analysis = WorkAnalysis::new(beta, &h0, &h1, &u).unwrap();
        let bounds = analysis.bounds_report();
        assert!(bounds.slack19 >= -1e-12);
        assert!((bounds.slack19 - bounds.slack21).abs() < 1e-15);
    }

    #[test]
    fn identity_protocol_reports() {
        let h = HermitianOperator::diagonal(&[0.0, 0.5, 2.0]);
        let a = WorkAnalysis::new(1.0, &h, &h, &UnitaryOperator::identity(3)).unwrap();
        let m = a.modified_jarzynski_report();
        assert!((m.lhs - 1.0).abs() < 1e-15);
        assert_eq!(m.delta_f, 0.0);
        assert!(m.s_rel.abs() < 1e-14);
        let b = a.bounds_report();
        assert!(b.slack19.abs() < 1e-14 && b.slack21.abs() < 1e-14);
        let pg = a.pseudo_gibbs();
        assert!((pg.ln_z_tilde - a.initial().ln_z()).abs() < 1e-15);
        let diff = pg.density.matrix().sub(a.initial().density().matrix()).unwrap();
        assert!(diff.max_norm() < 1e-15);
    }

    #[test]
    fn driven_qubit_identities() {
        let h0 = HermitianOperator::diagonal(&[-0.5, 0.5]);
        let h1 =
            HermitianOperator::from_real_symmetric(&DMatrix::from_row_slice(2, 2, &[0.2, 0.7, 0.7, -0.4])).unwrap();
        let u = UnitaryOperator::new(expm_hermitian(&h1, C64::new(0.0, -1.3))).unwrap();
        let a = WorkAnalysis::new(2.0, &h0, &h1, &u).unwrap();
        assert!(a.jarzynski_report().jarzynski_residual < 1e-13);
        let m = a.modified_jarzynski_report();
        assert!(m.residual < 1e-13 && m.closed_form_residual < 1e-12);
        assert!(m.s_rel > 0.0);
        assert!(a.first_law_report().unwrap().residual < 1e-14);
        assert!(a.measurement_entropy_change().unwrap() > 0.0);
    }
}
