//! Gibbs states, free energies, measurement dephasing and entropy functionals.
//!
//! Logarithms are natural and `k_B = 1`, so entropies are dimensionless.

use nalgebra::{DMatrix, DVector};

use crate::error::{require_positive, Error, Result};
use crate::linalg::{
    check_dims, eig_hermitian, eigh, trace_of_product, weighted_outer, ComplexMatrix, HermitianOperator,
    SpectralDecomposition, C64,
};

const DENSITY_TOL: f64 = 1e-10;

/// Eigenvalues of the second argument below this are treated as zero when
/// checking the support condition of the relative entropy.
pub const SUPPORT_TOL: f64 = 1e-14;

/// Weight the first argument may place outside the support of the second
/// before the relative entropy is reported as infinite.
pub const SUPPORT_LEAK_TOL: f64 = 1e-12;

/// Unit-trace positive-semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("Hermiticity defect {defect:.3e}")));
        }
        let h = HermitianOperator::symmetrized(matrix);
        let trace = h.matrix().trace().re;
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        let lowest = eigh(&h).values[0];
        if lowest < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(Self(h))
    }

    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(ComplexMatrix::new(matrix)?)
    }

    pub(crate) fn from_hermitian_unchecked(h: HermitianOperator) -> Self {
        Self(h)
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidDensity("zero or non-finite state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Self::new(ComplexMatrix::new(&v * v.adjoint())?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::diagonal(&vec![1.0 / dim as f64; dim]))
    }

    /// `sum_i p_i |b_i><b_i|` for the columns `b_i` of an orthonormal basis.
    pub fn from_spectrum(probabilities: &[f64], basis: &DMatrix<C64>) -> Result<Self> {
        check_dims(basis.ncols(), probabilities.len())?;
        let w: Vec<C64> = probabilities.iter().map(|&p| C64::new(p, 0.0)).collect();
        Self::new(ComplexMatrix::new(weighted_outer(basis, &w))?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        self.0.as_matrix()
    }

    /// Eigenvalues ascending, clamped at zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.0).values.into_iter().map(|x| x.max(0.0)).collect()
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(self.as_matrix(), self.as_matrix()).re
    }

    /// `trace(rho H)`.
    pub fn energy(&self, h: &HermitianOperator) -> Result<f64> {
        h.expectation(self.as_matrix())
    }
}

/// Thermal state `exp(-beta H) / Z` together with its spectral data.
#[derive(Clone, Debug)]
pub struct ThermalEnsemble {
    beta: f64,
    hamiltonian: HermitianOperator,
    spectrum: SpectralDecomposition,
    ln_z: f64,
    occupations: Vec<f64>,
    density: DensityMatrix,
}

impl ThermalEnsemble {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn ln_z(&self) -> f64 {
        self.ln_z
    }

    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }

    pub fn free_energy(&self) -> f64 {
        free_energy_from_ln_z(self.ln_z, self.beta)
    }

    /// Occupation of a single eigenstate of each level, `exp(-beta eps_n) / Z`.
    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    /// Occupation of every basis vector of [`spectrum`](Self::spectrum).
    pub fn state_occupations(&self) -> Vec<f64> {
        self.spectrum
            .level_of_state()
            .into_iter()
            .map(|l| self.occupations[l])
            .collect()
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.density
    }

    /// `trace(rho H)`.
    pub fn mean_energy(&self) -> f64 {
        self.occupations
            .iter()
            .zip(self.spectrum.eigenvalues())
            .zip(self.spectrum.multiplicities())
            .map(|((p, e), &m)| p * e * m as f64)
            .sum()
    }

    /// `ln rho = -beta H - ln Z`, exact even where `rho` underflows.
    pub fn log_density(&self) -> HermitianOperator {
        let n = self.hamiltonian.dim();
        let m = self.hamiltonian.as_matrix() * C64::new(-self.beta, 0.0)
            - DMatrix::<C64>::identity(n, n) * C64::new(self.ln_z, 0.0);
        HermitianOperator::symmetrized(ComplexMatrix::new(m).expect("finite log-density"))
    }
}

/// Gibbs state of `h` at inverse temperature `beta > 0`.
///
/// Boltzmann weights are shifted by the ground energy, so `Z` never overflows
/// in the intermediate sums; `ln Z` is carried exactly.
pub fn gibbs(h: &HermitianOperator, beta: f64) -> Result<ThermalEnsemble> {
    gibbs_with_spectrum(h, eig_hermitian(h, None), beta)
}

/// As [`gibbs`], reusing a decomposition of `h`.
pub fn gibbs_with_spectrum(
    h: &HermitianOperator,
    spectrum: SpectralDecomposition,
    beta: f64,
) -> Result<ThermalEnsemble> {
    require_positive("beta", beta)?;
    check_dims(h.dim(), spectrum.dim())?;
    let ground = spectrum.eigenvalues()[0];
    let shifted: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .map(|&e| (-beta * (e - ground)).exp())
        .collect();
    let sum: f64 = shifted
        .iter()
        .zip(spectrum.multiplicities())
        .map(|(w, &m)| w * m as f64)
        .sum();
    let ln_z = -beta * ground + sum.ln();
    let occupations: Vec<f64> = shifted.iter().map(|w| w / sum).collect();
    let per_state: Vec<f64> = spectrum.level_of_state().into_iter().map(|l| occupations[l]).collect();
    let w: Vec<C64> = per_state.iter().map(|&p| C64::new(p, 0.0)).collect();
    let density = DensityMatrix(HermitianOperator::symmetrized(ComplexMatrix::from_raw(weighted_outer(
        spectrum.basis(),
        &w,
    ))));
    Ok(ThermalEnsemble {
        beta,
        hamiltonian: h.clone(),
        spectrum,
        ln_z,
        occupations,
        density,
    })
}

/// `F = -ln(Z) / beta`; requires `Z > 0`, `beta > 0`.
pub fn free_energy(z: f64, beta: f64) -> f64 {
    -z.ln() / beta
}

pub fn free_energy_from_ln_z(ln_z: f64, beta: f64) -> f64 {
    -ln_z / beta
}

/// Average post-measurement state `sum_n Pi_n rho Pi_n`.
pub fn dephase(rho: &DensityMatrix, spectrum: &SpectralDecomposition) -> Result<DensityMatrix> {
    check_dims(rho.dim(), spectrum.dim())?;
    let basis = spectrum.basis();
    let mut in_basis = basis.adjoint() * rho.as_matrix() * basis;
    let labels = spectrum.level_of_state();
    for j in 0..labels.len() {
        for i in 0..labels.len() {
            if labels[i] != labels[j] {
                in_basis[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    let out = basis * in_basis * basis.adjoint();
    Ok(DensityMatrix(HermitianOperator::symmetrized(ComplexMatrix::new(out)?)))
}

fn entropy_of(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// `-trace(rho ln rho)` with `0 ln 0 = 0`.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(&rho.eigenvalues())
}

/// Entropy increase caused by a projective measurement in `spectrum`'s eigenbasis.
pub fn measurement_entropy_change(rho: &DensityMatrix, spectrum: &SpectralDecomposition) -> Result<f64> {
    let measured = dephase(rho, spectrum)?;
    Ok(vn_entropy(&measured) - vn_entropy(rho))
}

/// `S(a || b) = trace(a ln a) - trace(a ln b)`.
///
/// Returns `f64::INFINITY` when `a` places more than [`SUPPORT_LEAK_TOL`]
/// weight on the kernel of `b` (eigenvalues below [`SUPPORT_TOL`]).
pub fn relative_entropy(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let neg_entropy = -vn_entropy(a);
    let eig_b = eigh(b.hermitian());
    let rotated = eig_b.vectors.adjoint() * a.as_matrix() * &eig_b.vectors;
    let mut cross = 0.0;
    let mut leak = 0.0;
    for (k, &mu) in eig_b.values.iter().enumerate() {
        let weight = rotated[(k, k)].re;
        if mu < SUPPORT_TOL {
            leak += weight.max(0.0);
        } else {
            cross += weight * mu.ln();
        }
    }
    if leak > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(neg_entropy - cross)
}

/// `S(a || rho_eq)` using the exact logarithm `ln rho_eq = -beta H - ln Z`.
pub fn relative_entropy_to_thermal(a: &DensityMatrix, thermal: &ThermalEnsemble) -> Result<f64> {
    check_dims(a.dim(), thermal.hamiltonian().dim())?;
    let cross = thermal.log_density().expectation(a.as_matrix())?;
    Ok(-vn_entropy(a) - cross)
}
