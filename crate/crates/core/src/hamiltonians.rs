//! Time-dependent Hamiltonian models `H(lambda)` and drive schedules `lambda(t)`.

use nalgebra::DMatrix;

use crate::error::{require_positive, Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};

/// Time profile of the control parameter between `lambda0` and `lambda_tau`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleShape {
    Linear,
    /// `lambda0 + (lambda_tau - lambda0)(3s^2 - 2s^3)`, `s = t / tau`.
    Smoothstep,
    /// Quench: `lambda(0) = lambda0`, `lambda(t) = lambda_tau` for `t > 0`.
    Sudden,
    Constant,
    /// Piecewise-linear through `(t, lambda)` knots.
    Tabulated(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveSchedule {
    duration: f64,
    shape: ScheduleShape,
    lambda0: f64,
    lambda_tau: f64,
}

impl DriveSchedule {
    /// Ramp of the given shape. Use [`constant`](Self::constant) and
    /// [`tabulated`](Self::tabulated) for the other two shapes.
    pub fn ramp(shape: ScheduleShape, duration: f64, lambda0: f64, lambda_tau: f64) -> Result<Self> {
        require_positive("duration", duration)?;
        for (name, v) in [("lambda0", lambda0), ("lambda_tau", lambda_tau)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        match shape {
            ScheduleShape::Constant if lambda0 != lambda_tau => Err(Error::InvalidSchedule(
                "constant schedule requires lambda0 == lambda_tau".into(),
            )),
            ScheduleShape::Tabulated(knots) => Self::tabulated(duration, knots),
            shape => Ok(Self {
                duration,
                shape,
                lambda0,
                lambda_tau,
            }),
        }
    }

    pub fn linear(duration: f64, lambda0: f64, lambda_tau: f64) -> Result<Self> {
        Self::ramp(ScheduleShape::Linear, duration, lambda0, lambda_tau)
    }

    pub fn smoothstep(duration: f64, lambda0: f64, lambda_tau: f64) -> Result<Self> {
        Self::ramp(ScheduleShape::Smoothstep, duration, lambda0, lambda_tau)
    }

    pub fn sudden(duration: f64, lambda0: f64, lambda_tau: f64) -> Result<Self> {
        Self::ramp(ScheduleShape::Sudden, duration, lambda0, lambda_tau)
    }

    pub fn constant(duration: f64, lambda: f64) -> Result<Self> {
        Self::ramp(ScheduleShape::Constant, duration, lambda, lambda)
    }

    /// Knots must start at `t = 0`, end at `t = duration` and be strictly increasing in `t`.
    pub fn tabulated(duration: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        require_positive("duration", duration)?;
        if knots.len() < 2 {
            return Err(Error::InvalidSchedule(
                "tabulated schedule needs at least two knots".into(),
            ));
        }
        if knots.iter().any(|(t, l)| !t.is_finite() || !l.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidSchedule("knot times must be strictly increasing".into()));
        }
        let (t_first, lambda0) = knots[0];
        let (t_last, lambda_tau) = knots[knots.len() - 1];
        if t_first != 0.0 || t_last != duration {
            return Err(Error::InvalidSchedule(format!(
                "knots must cover [0, {duration}] exactly, got [{t_first}, {t_last}]"
            )));
        }
        Ok(Self {
            duration,
            shape: ScheduleShape::Tabulated(knots),
            lambda0,
            lambda_tau,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn shape(&self) -> &ScheduleShape {
        &self.shape
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda_tau(&self) -> f64 {
        self.lambda_tau
    }

    /// True when `lambda(t)` takes a single value on `(0, tau]`.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.shape, ScheduleShape::Sudden | ScheduleShape::Constant)
            || (self.lambda0 == self.lambda_tau
                && matches!(self.shape, ScheduleShape::Linear | ScheduleShape::Smoothstep))
    }

    /// `lambda(t)`; `t` is clamped to `[0, tau]`.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration);
        if t == 0.0 {
            return self.lambda0;
        }
        if t == self.duration {
            return self.lambda_tau;
        }
        let s = t / self.duration;
        let span = self.lambda_tau - self.lambda0;
        match &self.shape {
            ScheduleShape::Linear => self.lambda0 + span * s,
            ScheduleShape::Smoothstep => self.lambda0 + span * s * s * (3.0 - 2.0 * s),
            ScheduleShape::Sudden => self.lambda_tau,
            ScheduleShape::Constant => self.lambda0,
            ScheduleShape::Tabulated(knots) => {
                let k = knots.partition_point(|&(tk, _)| tk <= t);
                let (t0, l0) = knots[k - 1];
                let (t1, l1) = knots[k];
                l0 + (l1 - l0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// `(min, max)` of `lambda` over the schedule.
    pub fn lambda_range(&self) -> (f64, f64) {
        match &self.shape {
            ScheduleShape::Tabulated(knots) => knots
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, l)| {
                    (lo.min(l), hi.max(l))
                }),
            _ => (self.lambda0.min(self.lambda_tau), self.lambda0.max(self.lambda_tau)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(self) -> DMatrix<C64> {
        let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        match self {
            PauliAxis::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            PauliAxis::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            PauliAxis::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// Position and momentum of an oscillator in its truncated Fock basis.
#[derive(Clone, Debug)]
pub struct FockOperators {
    pub x: HermitianOperator,
    pub p: HermitianOperator,
}

fn check_fock_args(n_trunc: usize, mass: f64, hbar: f64, omega_ref: f64) -> Result<()> {
    if n_trunc < 2 {
        return Err(Error::InvalidParameter {
            name: "n_trunc",
            value: n_trunc as f64,
        });
    }
    require_positive("mass", mass)?;
    require_positive("hbar", hbar)?;
    require_positive("omega_ref", omega_ref)
}

/// `x = sqrt(hbar / 2 m w) (a + a^dagger)`, `p = i sqrt(hbar m w / 2)(a^dagger - a)`
/// in the first `n_trunc` Fock states of the `omega_ref` oscillator.
pub fn fock_operators(n_trunc: usize, mass: f64, hbar: f64, omega_ref: f64) -> Result<FockOperators> {
    check_fock_args(n_trunc, mass, hbar, omega_ref)?;
    let x0 = (hbar / (2.0 * mass * omega_ref)).sqrt();
    let p0 = (hbar * mass * omega_ref / 2.0).sqrt();
    let mut x = DMatrix::zeros(n_trunc, n_trunc);
    let mut p = DMatrix::zeros(n_trunc, n_trunc);
    for n in 0..n_trunc - 1 {
        // <n|a|n+1> = sqrt(n+1)
        let s = ((n + 1) as f64).sqrt();
        x[(n, n + 1)] = C64::new(x0 * s, 0.0);
        x[(n + 1, n)] = C64::new(x0 * s, 0.0);
        p[(n, n + 1)] = C64::new(0.0, -p0 * s);
        p[(n + 1, n)] = C64::new(0.0, p0 * s);
    }
    Ok(FockOperators {
        x: HermitianOperator::from_matrix(x)?,
        p: HermitianOperator::from_matrix(p)?,
    })
}

/// `x^2` and `p^2` with matrix elements taken from the untruncated ladder
/// algebra, then truncated. Unlike squaring the truncated `x` and `p`, this
/// keeps `H(omega_ref)` exactly diagonal with spectrum `hbar omega_ref (n + 1/2)`.
fn fock_quadratures(n_trunc: usize, mass: f64, hbar: f64, omega_ref: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let xs = hbar / (2.0 * mass * omega_ref);
    let ps = hbar * mass * omega_ref / 2.0;
    let mut x2 = DMatrix::zeros(n_trunc, n_trunc);
    let mut p2 = DMatrix::zeros(n_trunc, n_trunc);
    for n in 0..n_trunc {
        let d = (2 * n + 1) as f64;
        x2[(n, n)] = xs * d;
        p2[(n, n)] = ps * d;
        if n + 2 < n_trunc {
            let s = (((n + 1) * (n + 2)) as f64).sqrt();
            x2[(n, n + 2)] = xs * s;
            x2[(n + 2, n)] = xs * s;
            p2[(n, n + 2)] = -ps * s;
            p2[(n + 2, n)] = -ps * s;
        }
    }
    (x2, p2)
}

/// Parametric oscillator `p^2 / 2m + m omega^2 x^2 / 2` in a fixed Fock basis.
#[derive(Clone, Debug)]
pub struct ParametricOscillator {
    mass: f64,
    hbar: f64,
    omega_ref: f64,
    kinetic: DMatrix<f64>,
    x_squared: DMatrix<f64>,
}

impl ParametricOscillator {
    pub fn new(n_trunc: usize, mass: f64, hbar: f64, omega_ref: f64) -> Result<Self> {
        check_fock_args(n_trunc, mass, hbar, omega_ref)?;
        let (x_squared, p_squared) = fock_quadratures(n_trunc, mass, hbar, omega_ref);
        Ok(Self {
            mass,
            hbar,
            omega_ref,
            kinetic: p_squared / (2.0 * mass),
            x_squared,
        })
    }

    pub fn n_trunc(&self) -> usize {
        self.x_squared.nrows()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    pub fn hamiltonian(&self, omega: f64) -> HermitianOperator {
        let h = &self.kinetic + &self.x_squared * (0.5 * self.mass * omega * omega);
        HermitianOperator::symmetrized(ComplexMatrix::from_raw(h.map(|v| C64::new(v, 0.0))))
    }
}

/// Hermitian operators tabulated at increasing `lambda`, linearly interpolated.
#[derive(Clone, Debug)]
pub struct TabulatedOperators {
    knots: Vec<(f64, HermitianOperator)>,
}

impl TabulatedOperators {
    pub fn new(knots: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        let first = knots
            .first()
            .ok_or_else(|| Error::InvalidModel("tabulated model needs at least one operator".into()))?;
        let dim = first.1.dim();
        if let Some((_, op)) = knots.iter().find(|(_, op)| op.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: op.dim(),
            });
        }
        if knots.iter().any(|(l, _)| !l.is_finite()) || knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidModel(
                "lambda knots must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { knots })
    }

    pub fn dim(&self) -> usize {
        self.knots[0].1.dim()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn knots(&self) -> &[(f64, HermitianOperator)] {
        &self.knots
    }

    pub fn evaluate(&self, lambda: f64) -> Result<HermitianOperator> {
        let (min, max) = self.range();
        if !(lambda >= min && lambda <= max) {
            return Err(Error::OutOfRange {
                value: lambda,
                min,
                max,
            });
        }
        let k = self.knots.partition_point(|(l, _)| *l < lambda);
        if self.knots[k].0 == lambda {
            return Ok(self.knots[k].1.clone());
        }
        let (l0, h0) = &self.knots[k - 1];
        let (l1, h1) = &self.knots[k];
        let s = (lambda - l0) / (l1 - l0);
        h0.combine(1.0 - s, h1, s)
    }
}

#[derive(Clone, Debug)]
pub enum ModelKind {
    /// `H = (lambda / 2) sigma_axis + (delta / 2) sigma_x`.
    TwoLevel {
        delta: f64,
        axis: PauliAxis,
    },
    /// `lambda` is the angular frequency.
    ParametricOscillator(ParametricOscillator),
    Custom(TabulatedOperators),
}

#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    kind: ModelKind,
}

impl HamiltonianModel {
    pub fn two_level(delta: f64, axis: PauliAxis) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        Ok(Self {
            kind: ModelKind::TwoLevel { delta, axis },
        })
    }

    pub fn parametric_oscillator(n_trunc: usize, mass: f64, hbar: f64, omega_ref: f64) -> Result<Self> {
        Ok(Self {
            kind: ModelKind::ParametricOscillator(ParametricOscillator::new(n_trunc, mass, hbar, omega_ref)?),
        })
    }

    pub fn custom(table: TabulatedOperators) -> Self {
        Self {
            kind: ModelKind::Custom(table),
        }
    }

    /// Straight-line interpolation `H(lambda) = (1 - lambda) H0 + lambda H1` on `[0, 1]`.
    pub fn interpolating(h0: HermitianOperator, h1: HermitianOperator) -> Result<Self> {
        Ok(Self::custom(TabulatedOperators::new(vec![(0.0, h0), (1.0, h1)])?))
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::TwoLevel { .. } => 2,
            ModelKind::ParametricOscillator(osc) => osc.n_trunc(),
            ModelKind::Custom(table) => table.dim(),
        }
    }

    pub fn evaluate(&self, lambda: f64) -> Result<HermitianOperator> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
            });
        }
        match &self.kind {
            ModelKind::TwoLevel { delta, axis } => {
                let h =
                    axis.matrix() * C64::new(lambda / 2.0, 0.0) + PauliAxis::X.matrix() * C64::new(delta / 2.0, 0.0);
                Ok(HermitianOperator::symmetrized(ComplexMatrix::from_raw(h)))
            }
            ModelKind::ParametricOscillator(osc) => Ok(osc.hamiltonian(lambda)),
            ModelKind::Custom(table) => table.evaluate(lambda),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;

    #[test]
    fn schedule_endpoints_exact() {
        for shape in [ScheduleShape::Linear, ScheduleShape::Smoothstep, ScheduleShape::Sudden] {
            let s = DriveSchedule::ramp(shape, 2.5, 0.3, 1.7).unwrap();
            assert_eq!(s.value(0.0), 0.3);
            assert_eq!(s.value(2.5), 1.7);
        }
        let tab = DriveSchedule::tabulated(1.0, vec![(0.0, 1.0), (0.5, 3.0), (1.0, 2.0)]).unwrap();
        assert_eq!(tab.value(0.0), 1.0);
        assert_eq!(tab.value(1.0), 2.0);
        assert!((tab.value(0.25) - 2.0).abs() < 1e-15);
        assert!((tab.value(0.75) - 2.5).abs() < 1e-15);
        assert_eq!(tab.lambda_range(), (1.0, 3.0));
    }

    #[test]
    fn smoothstep_midpoint_and_sudden() {
        let s = DriveSchedule::smoothstep(1.0, 0.0, 1.0).unwrap();
        assert!((s.value(0.5) - 0.5).abs() < 1e-15);
        assert!((s.value(0.25) - (3.0 * 0.0625 - 2.0 * 0.015625)).abs() < 1e-15);
        let q = DriveSchedule::sudden(1.0, 0.0, 1.0).unwrap();
        assert_eq!(q.value(1e-12), 1.0);
    }

    #[test]
    fn invalid_schedules() {
        assert!(DriveSchedule::linear(0.0, 0.0, 1.0).is_err());
        assert!(DriveSchedule::ramp(ScheduleShape::Constant, 1.0, 0.0, 1.0).is_err());
        assert!(DriveSchedule::tabulated(1.0, vec![(0.0, 1.0), (0.0, 2.0), (1.0, 1.0)]).is_err());
        assert!(DriveSchedule::tabulated(1.0, vec![(0.1, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn two_level_definition() {
        let m = HamiltonianModel::two_level(0.4, PauliAxis::Z).unwrap();
        let h = m.evaluate(1.0).unwrap();
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.2, 0.0),
                C64::new(0.2, 0.0),
                C64::new(-0.5, 0.0),
            ],
        );
        assert!((h.as_matrix() - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn oscillator_matched_basis_is_diagonal() {
        let m = HamiltonianModel::parametric_oscillator(3, 1.0, 1.0, 1.0).unwrap();
        let h = m.evaluate(1.0).unwrap();
        let expect = ComplexMatrix::from_diagonal(&[0.5, 1.5, 2.5]);
        assert!(h.matrix().sub(&expect).unwrap().max_norm() < 1e-15);
    }

    #[test]
    fn oscillator_off_reference_frequency_ground_state() {
        let m = HamiltonianModel::parametric_oscillator(60, 1.0, 1.0, 1.0).unwrap();
        let spec = eig_hermitian(&m.evaluate(2.0).unwrap(), None);
        assert!((spec.eigenvalues()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fock_two_level_is_pauli() {
        let (m, hbar, w) = (1.3, 0.7, 2.1);
        let ops = fock_operators(2, m, hbar, w).unwrap();
        let sx = PauliAxis::X.matrix() * C64::new((hbar / (2.0 * m * w)).sqrt(), 0.0);
        let sy = PauliAxis::Y.matrix() * C64::new((hbar * m * w / 2.0).sqrt(), 0.0);
        assert!((ops.x.as_matrix() - sx).iter().all(|z| z.norm() < 1e-15));
        assert!((ops.p.as_matrix() - sy).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn canonical_commutator_on_upper_block() {
        let hbar = 0.9;
        let n = 12;
        let ops = fock_operators(n, 1.7, hbar, 0.6).unwrap();
        let c = ops.x.matrix().commutator(ops.p.matrix()).unwrap();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let target = if i == j {
                    C64::new(0.0, hbar)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((c.as_matrix()[(i, j)] - target).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn fock_assembled_spectrum() {
        // H from the truncated x, p reproduces hbar w (n + 1/2) on the lower half.
        let (n, mass, hbar, w) = (20, 1.0, 1.0, 1.5);
        let ops = fock_operators(n, mass, hbar, w).unwrap();
        let x = ops.x.as_matrix();
        let p = ops.p.as_matrix();
        let h = (p * p) * C64::new(1.0 / (2.0 * mass), 0.0) + (x * x) * C64::new(0.5 * mass * w * w, 0.0);
        let spec = eig_hermitian(&HermitianOperator::from_matrix(h).unwrap(), None);
        for k in 0..=n / 2 {
            assert!((spec.eigenvalues()[k] - hbar * w * (k as f64 + 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn tabulated_model_interpolates_and_rejects_extrapolation() {
        let model = HamiltonianModel::interpolating(
            HermitianOperator::diagonal(&[0.0, 1.0]),
            HermitianOperator::diagonal(&[0.0, 3.0]),
        )
        .unwrap();
        let h = model.evaluate(0.25).unwrap();
        assert!((h.as_matrix()[(1, 1)].re - 1.5).abs() < 1e-15);
        assert!(matches!(model.evaluate(1.5), Err(Error::OutOfRange { .. })));
    }
}
