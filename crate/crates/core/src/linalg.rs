//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here is dense: the operators of interest have dimension of a
//! few hundred at most. Hermitian eigenproblems are delegated to nalgebra's
//! tridiagonal QR solver; real symmetric inputs take the real path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for accepting a matrix as Hermitian, relative to `1 + max|A|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default unitarity tolerance on `max|U^dagger U - I|`.
pub const UNITARY_TOL: f64 = 1e-9;

/// A finite, square, non-empty complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Empty);
        }
        for col in 0..cols {
            for row in 0..rows {
                let z = matrix[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| C64::new(x, 0.0)))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: dim * dim,
                right: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diagonal: &[f64]) -> Self {
        let d = DVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| C64::new(x, 0.0)));
        Self(DMatrix::from_diagonal(&d))
    }

    pub(crate) fn from_raw(matrix: DMatrix<C64>) -> Self {
        debug_assert!(matrix.is_square());
        Self(matrix)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(gemm(&self.0, &other.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(gemm(&self.0, &other.0) - gemm(&other.0, &self.0)))
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = gemm(&self.0.adjoint(), &self.0);
        max_identity_deviation(&gram)
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

pub(crate) fn max_identity_deviation(m: &DMatrix<C64>) -> f64 {
    let mut defect = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            defect = defect.max((m[(i, j)] - target).norm());
        }
    }
    defect
}

/// A Hermitian operator, stored as its exact Hermitian part.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    /// Accepts `matrix` when `max|A - A^dagger| <= 1e-12 (1 + max|A|)`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL * (1.0 + matrix.max_norm()) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self::symmetrized(matrix))
    }

    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(ComplexMatrix::new(matrix)?)
    }

    pub fn from_real_symmetric(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(matrix)?)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self(ComplexMatrix::from_diagonal(values))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let m = matrix.into_inner();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self(ComplexMatrix(h))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        self.0.as_matrix()
    }

    /// Real linear combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let m = self.as_matrix() * C64::new(a, 0.0) + other.as_matrix() * C64::new(b, 0.0);
        Ok(Self(ComplexMatrix(m)))
    }

    /// `trace(rho A)` for a Hermitian `rho`, real by construction.
    pub fn expectation(&self, rho: &DMatrix<C64>) -> Result<f64> {
        check_dims(self.dim(), rho.nrows())?;
        Ok(trace_of_product(rho, self.as_matrix()).re)
    }
}

/// `trace(AB)` without forming the product.
pub fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// A unitary matrix together with its measured unitarity defect.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
    defect: f64,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, UNITARY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tolerance: f64) -> Result<Self> {
        let defect = matrix.unitarity_defect();
        if defect > tolerance {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        Ok(Self { matrix, defect })
    }

    /// Wraps a matrix without enforcing a tolerance; the defect is still recorded.
    pub(crate) fn unchecked(matrix: ComplexMatrix) -> Self {
        let defect = matrix.unitarity_defect();
        Self { matrix, defect }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            defect: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        self.matrix.as_matrix()
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }
}

/// Raw Hermitian eigenpairs, eigenvalues ascending.
#[derive(Clone, Debug)]
pub(crate) struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

pub(crate) fn eigh(a: &HermitianOperator) -> Eigh {
    let m = a.as_matrix();
    let n = m.nrows();
    if a.matrix().is_real() {
        let (values, vectors) = eigh_real(m.map(|z| z.re));
        return Eigh {
            values,
            vectors: vectors.map(|x| C64::new(x, 0.0)),
        };
    }
    let (values, vectors) = {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Eigh {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Degeneracy grouping tolerance used when none is supplied:
/// `1e-9 (eps_max - eps_min + 1)`.
pub fn default_group_tol(eigenvalues: &[f64]) -> f64 {
    match (eigenvalues.first(), eigenvalues.last()) {
        (Some(lo), Some(hi)) => 1e-9 * (hi - lo + 1.0),
        _ => 1e-9,
    }
}

/// Eigenvalues grouped into distinct levels with orthogonal projectors.
///
/// Each level keeps an orthonormal basis of its eigenspace. The basis is
/// canonical: it is re-derived from the level projector by pivoted
/// Gram-Schmidt over the standard basis vectors (first column whose residual
/// is at least half the largest residual), with the pivot entry real and
/// positive. Two decompositions of the same operator therefore agree
/// vector-by-vector regardless of the eigensolver's internal rotations.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    offsets: Vec<usize>,
    basis: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn num_levels(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Distinct eigenvalues, strictly increasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Unitary whose columns are the eigenvectors, grouped by level.
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    /// Column range of `level` within [`basis`](Self::basis).
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        self.offsets[level]..self.offsets[level] + self.multiplicities[level]
    }

    /// Level index of every basis vector.
    pub fn level_of_state(&self) -> Vec<usize> {
        let mut labels = Vec::with_capacity(self.dim());
        for (level, &m) in self.multiplicities.iter().enumerate() {
            labels.extend(std::iter::repeat_n(level, m));
        }
        labels
    }

    /// Energy of every basis vector.
    pub fn state_energies(&self) -> Vec<f64> {
        self.level_of_state().into_iter().map(|l| self.eigenvalues[l]).collect()
    }

    pub fn projector(&self, level: usize) -> ComplexMatrix {
        let cols = self.basis.columns(self.offsets[level], self.multiplicities[level]);
        ComplexMatrix(cols * cols.adjoint())
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        (0..self.num_levels()).map(|l| self.projector(l)).collect()
    }

    /// `sum_n f(eps_n) Pi_n`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let weights: Vec<C64> = self.state_energies().into_iter().map(f).collect();
        ComplexMatrix(weighted_outer(&self.basis, &weights))
    }

    /// `sum_n eps_n Pi_n`.
    pub fn reconstruct(&self) -> HermitianOperator {
        HermitianOperator::symmetrized(self.apply_function(|e| C64::new(e, 0.0)))
    }

    /// Builds a decomposition from an explicit orthonormal basis and per-vector energies.
    pub fn from_basis(energies: &[f64], basis: DMatrix<C64>, group_tol: Option<f64>) -> Result<Self> {
        let n = basis.nrows();
        check_dims(n, energies.len())?;
        ComplexMatrix::new(basis.clone())?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| energies[i].total_cmp(&energies[j]));
        let eig = Eigh {
            values: order.iter().map(|&i| energies[i]).collect(),
            vectors: DMatrix::from_fn(n, n, |r, c| basis[(r, order[c])]),
        };
        Ok(Self::from_eigh(eig, group_tol))
    }

    fn from_eigh(eig: Eigh, group_tol: Option<f64>) -> Self {
        let n = eig.values.len();
        let tol = group_tol.unwrap_or_else(|| default_group_tol(&eig.values));
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || eig.values[i] - eig.values[i - 1] > tol {
                groups.push((start, i - start));
                start = i;
            }
        }
        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut multiplicities = Vec::with_capacity(groups.len());
        let mut offsets = Vec::with_capacity(groups.len());
        let mut basis = DMatrix::zeros(n, n);
        for &(offset, count) in &groups {
            let mean = eig.values[offset..offset + count].iter().sum::<f64>() / count as f64;
            eigenvalues.push(mean);
            multiplicities.push(count);
            offsets.push(offset);
            let block = canonical_basis(&eig.vectors.columns(offset, count).into_owned());
            basis.columns_mut(offset, count).copy_from(&block);
        }
        Self {
            eigenvalues,
            multiplicities,
            offsets,
            basis,
        }
    }
}

/// `V diag(w) V^dagger`.
pub(crate) fn weighted_outer(v: &DMatrix<C64>, weights: &[C64]) -> DMatrix<C64> {
    let mut scaled = v.clone();
    for (j, &w) in weights.iter().enumerate() {
        for z in scaled.column_mut(j).iter_mut() {
            *z *= w;
        }
    }
    gemm(&scaled, &v.adjoint())
}

/// Below this size nalgebra's generic complex product is as fast as splitting.
const SPLIT_GEMM_MIN_DIM: usize = 24;

pub(crate) fn split(m: &DMatrix<C64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub(crate) fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<C64> {
    re.zip_map(im, C64::new)
}

/// Complex product through real f64 kernels: nalgebra only dispatches real
/// scalars to its blocked gemm.
pub(crate) fn gemm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    if a.nrows().max(a.ncols()).max(b.ncols()) < SPLIT_GEMM_MIN_DIM {
        return a * b;
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let (re, im) = gemm_split(&ar, &ai, &br, &bi);
    join(&re, &im)
}

pub(crate) fn gemm_split(
    ar: &DMatrix<f64>,
    ai: &DMatrix<f64>,
    br: &DMatrix<f64>,
    bi: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut re = ar * br;
    re.gemm(-1.0, ai, bi, 1.0);
    let mut im = ar * bi;
    im.gemm(1.0, ai, br, 1.0);
    (re, im)
}

/// Real symmetric eigendecomposition sorted ascending.
pub(crate) fn eigh_real(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn canonical_basis(vectors: &DMatrix<C64>) -> DMatrix<C64> {
    let n = vectors.nrows();
    let k = vectors.ncols();
    // Residual projector onto the part of the eigenspace not yet spanned.
    let mut residual = vectors * vectors.adjoint();
    let mut out = DMatrix::zeros(n, k);
    for slot in 0..k {
        let norms: Vec<f64> = (0..n).map(|j| residual.column(j).norm()).collect();
        let largest = norms.iter().cloned().fold(0.0_f64, f64::max);
        let pivot = norms.iter().position(|&x| x >= 0.5 * largest).unwrap_or(0);
        let mut q: DVector<C64> = residual.column(pivot).into_owned();
        for prev in 0..slot {
            let p = out.column(prev);
            let overlap = p.dotc(&q);
            q -= p * overlap;
        }
        let phase = q[pivot];
        let phase = if phase.norm() > 0.0 {
            phase.conj() / phase.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q *= phase;
        let norm = q.norm();
        q /= C64::new(norm, 0.0);
        residual -= &q * q.adjoint();
        out.set_column(slot, &q);
    }
    out
}

/// Hermitian eigendecomposition with degeneracy grouping.
///
/// Eigenvalues within `group_tol` of their neighbour are merged into one level;
/// `None` selects [`default_group_tol`].
pub fn eig_hermitian(a: &HermitianOperator, group_tol: Option<f64>) -> SpectralDecomposition {
    SpectralDecomposition::from_eigh(eigh(a), group_tol)
}

/// `exp(scale A)` for Hermitian `A`.
///
/// The exponent is shifted by its largest real part before exponentiation, so
/// the result stays finite whenever `|scale| max|eps| <= 700`.
pub fn expm_hermitian(a: &HermitianOperator, scale: C64) -> ComplexMatrix {
    let (m, log_factor) = expm_hermitian_shifted(a, scale);
    if log_factor == 0.0 {
        m
    } else {
        m.scale(C64::new(log_factor.exp(), 0.0))
    }
}

/// Returns `(M, s)` with `exp(scale A) = e^s M` and the largest eigenvalue of `M` of modulus one.
pub fn expm_hermitian_shifted(a: &HermitianOperator, scale: C64) -> (ComplexMatrix, f64) {
    let eig = eigh(a);
    let shift = eig
        .values
        .iter()
        .map(|&e| (scale * e).re)
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if scale.re == 0.0 { 0.0 } else { shift };
    let weights: Vec<C64> = eig.values.iter().map(|&e| (scale * e - shift).exp()).collect();
    (ComplexMatrix(weighted_outer(&eig.vectors, &weights)), shift)
}
