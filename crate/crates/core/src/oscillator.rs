//! Closed-form work statistics of the parametric harmonic oscillator.
//!
//! For `H = p^2/2m + m omega(t)^2 x^2/2` every protocol enters the mean work,
//! the pseudo-partition function and the informational relative entropy only
//! through the adiabaticity measure `Q*`, computed here from the two classical
//! solutions of `u'' = -omega(t)^2 u`. A truncated Fock-basis pipeline
//! ([`fock_cross_check`]) checks the closed forms against the generic
//! matrix machinery.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::hamiltonians::{DriveSchedule, HamiltonianModel, ScheduleShape};
use crate::linalg::UNITARY_TOL;
use crate::propagation::propagate_with_tolerance;
use crate::work::{mean_work, WorkAnalysis};

pub const DEFAULT_N_TRUNC: usize = 120;
pub const DEFAULT_ODE_STEPS: usize = 1000;

/// Step-doubling acceptance for the classical integration.
const ODE_TOL: f64 = 1e-10;
const ODE_MAX_STEPS: usize = 1 << 23;

/// Physical parameters of a frequency change `omega0 -> omega_tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillatorParams {
    pub omega0: f64,
    pub omega_tau: f64,
    pub beta: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl OscillatorParams {
    pub fn new(omega0: f64, omega_tau: f64, beta: f64, hbar: f64, mass: f64) -> Result<Self> {
        require_positive("omega0", omega0)?;
        require_positive("omega_tau", omega_tau)?;
        require_positive("beta", beta)?;
        require_positive("hbar", hbar)?;
        require_positive("mass", mass)?;
        Ok(Self {
            omega0,
            omega_tau,
            beta,
            hbar,
            mass,
        })
    }

    /// `hbar = beta = 1`, `omega: 1 -> 2`.
    pub fn fig1() -> Self {
        Self::new(1.0, 2.0, 1.0, 1.0, 1.0).expect("valid preset")
    }

    /// `hbar = beta = 1`, `omega: 2 -> 1`.
    pub fn fig2() -> Self {
        Self::new(2.0, 1.0, 1.0, 1.0, 1.0).expect("valid preset")
    }
}

/// Oscillator parameters together with the frequency schedule `omega(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorSpec {
    params: OscillatorParams,
    schedule: DriveSchedule,
}

impl OscillatorSpec {
    pub fn new(params: OscillatorParams, schedule: DriveSchedule) -> Result<Self> {
        if schedule.lambda0() != params.omega0 || schedule.lambda_tau() != params.omega_tau {
            return Err(Error::InvalidSchedule(format!(
                "schedule runs {} -> {}, expected omega {} -> {}",
                schedule.lambda0(),
                schedule.lambda_tau(),
                params.omega0,
                params.omega_tau
            )));
        }
        let (lo, _) = schedule.lambda_range();
        if lo <= 0.0 {
            return Err(Error::InvalidSchedule("frequency must stay positive".into()));
        }
        Ok(Self { params, schedule })
    }

    /// Ramp of the given shape between the parameters' end frequencies.
    pub fn with_ramp(params: OscillatorParams, shape: ScheduleShape, duration: f64) -> Result<Self> {
        let schedule = DriveSchedule::ramp(shape, duration, params.omega0, params.omega_tau)?;
        Self::new(params, schedule)
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn schedule(&self) -> &DriveSchedule {
        &self.schedule
    }

    fn frequency(&self, t: f64) -> f64 {
        match self.schedule.shape() {
            // The quench value holds on the whole open interval.
            ScheduleShape::Sudden => self.params.omega_tau,
            _ => self.schedule.value(t),
        }
    }
}

/// Dimensionless adiabaticity measure, `Q* >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct AdiabaticityMeasure(f64);

impl AdiabaticityMeasure {
    pub fn new(qstar: f64) -> Result<Self> {
        if qstar.is_finite() && qstar >= 1.0 - 1e-9 {
            Ok(Self(qstar))
        } else {
            Err(Error::InvalidParameter {
                name: "qstar",
                value: qstar,
            })
        }
    }

    pub fn adiabatic() -> Self {
        Self(1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QstarResult {
    pub qstar: f64,
    pub steps: usize,
    /// `|Q*(2n) - Q*(n)|` for the accepted step count.
    pub step_doubling_change: f64,
    pub converged: bool,
    /// `max_t |X Y' - X' Y + 1|` along the accepted integration.
    pub wronskian_defect: f64,
}

impl QstarResult {
    pub fn measure(&self) -> Result<AdiabaticityMeasure> {
        AdiabaticityMeasure::new(self.qstar)
    }
}

#[derive(Clone, Copy, Debug)]
struct ClassicalEnd {
    x: f64,
    dx: f64,
    y: f64,
    dy: f64,
    wronskian_defect: f64,
}

fn integrate_classical(spec: &OscillatorSpec, steps: usize) -> ClassicalEnd {
    let tau = spec.schedule.duration();
    let h = tau / steps as f64;
    let w2 = |t: f64| {
        let w = spec.frequency(t);
        w * w
    };
    // State: (X, X', Y, Y') with X(0) = 0, X'(0) = 1, Y(0) = 1, Y'(0) = 0.
    let mut s = [0.0, 1.0, 1.0, 0.0];
    let deriv = |t: f64, s: &[f64; 4]| {
        let k = w2(t);
        [s[1], -k * s[0], s[3], -k * s[2]]
    };
    let mut defect = 0.0_f64;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = deriv(t, &s);
        let s2: [f64; 4] = std::array::from_fn(|j| s[j] + 0.5 * h * k1[j]);
        let k2 = deriv(t + 0.5 * h, &s2);
        let s3: [f64; 4] = std::array::from_fn(|j| s[j] + 0.5 * h * k2[j]);
        let k3 = deriv(t + 0.5 * h, &s3);
        let s4: [f64; 4] = std::array::from_fn(|j| s[j] + h * k3[j]);
        let k4 = deriv(t + h, &s4);
        for j in 0..4 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        defect = defect.max((s[0] * s[3] - s[1] * s[2] + 1.0).abs());
    }
    ClassicalEnd {
        x: s[0],
        dx: s[1],
        y: s[2],
        dy: s[3],
        wronskian_defect: defect,
    }
}

fn qstar_from_end(params: &OscillatorParams, end: &ClassicalEnd) -> f64 {
    let (w0, wt) = (params.omega0, params.omega_tau);
    (w0 * w0 * (wt * wt * end.x * end.x + end.dx * end.dx) + (wt * wt * end.y * end.y + end.dy * end.dy))
        / (2.0 * w0 * wt)
}

/// `Q*` from the classical solutions `X` (`X(0)=0, X'(0)=1`) and `Y`
/// (`Y(0)=1, Y'(0)=0`):
///
/// `Q* = [w0^2 (wt^2 X(tau)^2 + X'(tau)^2) + (wt^2 Y(tau)^2 + Y'(tau)^2)] / (2 w0 wt)`.
///
/// Fixed-step RK4, doubling the step count from `ode_steps` until two
/// successive values agree within `1e-10`.
pub fn qstar_from_dynamics(spec: &OscillatorSpec, ode_steps: usize) -> Result<QstarResult> {
    if ode_steps < 100 {
        return Err(Error::InvalidParameter {
            name: "ode_steps",
            value: ode_steps as f64,
        });
    }
    let mut steps = ode_steps;
    let mut previous = qstar_from_end(&spec.params, &integrate_classical(spec, steps));
    loop {
        let next_steps = steps * 2;
        let end = integrate_classical(spec, next_steps);
        let q = qstar_from_end(&spec.params, &end);
        let change = (q - previous).abs();
        let converged = change <= ODE_TOL * q.abs().max(1.0);
        if converged || next_steps * 2 > ODE_MAX_STEPS {
            return Ok(QstarResult {
                qstar: q,
                steps: next_steps,
                step_doubling_change: change,
                converged,
                wronskian_defect: end.wronskian_defect,
            });
        }
        previous = q;
        steps = next_steps;
    }
}

/// `Q*` of the instantaneous quench, `(w0^2 + wt^2) / (2 w0 wt)`.
pub fn sudden_qstar(params: &OscillatorParams) -> f64 {
    let (w0, wt) = (params.omega0, params.omega_tau);
    (w0 * w0 + wt * wt) / (2.0 * w0 * wt)
}

/// `ln sinh(x)` for `x > 0`, without overflow for large `x`.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `<W> = (hbar/2)(Q* wt - w0) coth(beta hbar w0 / 2)`.
pub fn avg_work(qstar: AdiabaticityMeasure, params: &OscillatorParams) -> f64 {
    let x0 = 0.5 * params.beta * params.hbar * params.omega0;
    0.5 * params.hbar * (qstar.value() * params.omega_tau - params.omega0) / x0.tanh()
}

/// `dF = (1/beta) ln[sinh(beta hbar wt / 2) / sinh(beta hbar w0 / 2)]`.
pub fn delta_f(params: &OscillatorParams) -> f64 {
    let half = 0.5 * params.beta * params.hbar;
    (ln_sinh(half * params.omega_tau) - ln_sinh(half * params.omega0)) / params.beta
}

/// `ln Z` of the untruncated oscillator, `Z = 1 / (2 sinh(beta hbar omega / 2))`.
pub fn ln_partition_function(omega: f64, beta: f64, hbar: f64) -> f64 {
    -std::f64::consts::LN_2 - ln_sinh(0.5 * beta * hbar * omega)
}

/// `Z_tilde = 1 / (2 sinh(beta Q* hbar wt / 2))`.
pub fn pseudo_partition(qstar: AdiabaticityMeasure, params: &OscillatorParams) -> f64 {
    ln_pseudo_partition(qstar, params).exp()
}

pub fn ln_pseudo_partition(qstar: AdiabaticityMeasure, params: &OscillatorParams) -> f64 {
    ln_partition_function(qstar.value() * params.omega_tau, params.beta, params.hbar)
}

/// `S = ln[sinh(beta Q* hbar wt / 2) / sinh(beta hbar wt / 2)]`.
pub fn rel_entropy_analytic(qstar: AdiabaticityMeasure, params: &OscillatorParams) -> f64 {
    let x = 0.5 * params.beta * params.hbar * params.omega_tau;
    ln_sinh(qstar.value() * x) - ln_sinh(x)
}

/// `<n_tau>_{n0} = (n0 + 1/2) Q* - 1/2`.
pub fn mean_occupation(n0: usize, qstar: AdiabaticityMeasure) -> f64 {
    (n0 as f64 + 0.5) * qstar.value() - 0.5
}

/// One row of the figure data: average work, free-energy change and the informational bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub qstar: f64,
    pub beta_w: f64,
    pub beta_df: f64,
    pub beta_df_plus_s: f64,
}

impl SweepRow {
    pub fn at(qstar: AdiabaticityMeasure, params: &OscillatorParams) -> Self {
        let beta_df = params.beta * delta_f(params);
        Self {
            qstar: qstar.value(),
            beta_w: params.beta * avg_work(qstar, params),
            beta_df,
            beta_df_plus_s: beta_df + rel_entropy_analytic(qstar, params),
        }
    }
}

/// `points` equally spaced values on `[min, max]`.
pub fn qstar_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..points)
            .map(|i| {
                if i == points - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

/// Figure rows with `Q*` as the independent variable.
pub fn figure_sweep(params: &OscillatorParams, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: 0.0,
        });
    }
    grid.iter()
        .map(|&q| Ok(SweepRow::at(AdiabaticityMeasure::new(q)?, params)))
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TauSweepRow {
    pub tau: f64,
    pub qstar: QstarResult,
    pub row: SweepRow,
}

/// Figure rows over protocol durations, with `Q*` computed from the dynamics.
pub fn figure_sweep_tau(
    params: &OscillatorParams,
    shape: &ScheduleShape,
    taus: &[f64],
    ode_steps: usize,
) -> Result<Vec<TauSweepRow>> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter {
            name: "taus",
            value: 0.0,
        });
    }
    taus.iter()
        .map(|&tau| {
            let spec = OscillatorSpec::with_ramp(*params, shape.clone(), tau)?;
            let q = qstar_from_dynamics(&spec, ode_steps)?;
            Ok(TauSweepRow {
                tau,
                qstar: q,
                row: SweepRow::at(q.measure()?, params),
            })
        })
        .collect()
}

/// Whether each curve is non-decreasing along the rows: `[beta_w, beta_df, beta_df_plus_s]`.
pub fn monotonicity(rows: &[SweepRow]) -> [bool; 3] {
    let up = |f: fn(&SweepRow) -> f64| rows.windows(2).all(|w| f(&w[1]) >= f(&w[0]));
    [up(|r| r.beta_w), up(|r| r.beta_df), up(|r| r.beta_df_plus_s)]
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OccupationCheck {
    pub n0: usize,
    pub numeric: f64,
    pub analytic: f64,
}

/// Truncated-Fock numerics against the closed forms for one protocol.
#[derive(Clone, Debug, Serialize)]
pub struct FockCrossCheck {
    pub n_trunc: usize,
    pub steps: usize,
    pub qstar: QstarResult,
    pub analytic_mean_work: f64,
    pub numeric_mean_work_mf: f64,
    pub numeric_mean_work_ttm: f64,
    pub mean_work_relative_deviation: f64,
    pub occupations: Vec<OccupationCheck>,
    pub max_occupation_deviation: f64,
    pub z_tilde_numeric: f64,
    pub z_tilde_analytic: f64,
    pub unitarity_defect: f64,
    /// Population of the top 10% of Fock levels after the protocol.
    pub tail_occupancy: f64,
    /// Tail occupancy below `1e-8` and unitarity defect within tolerance.
    pub trusted: bool,
}

/// Runs the oscillator protocol through the generic matrix pipeline in a
/// Fock basis fixed at `omega0` and compares with the closed forms.
pub fn fock_cross_check(
    spec: &OscillatorSpec,
    n_trunc: usize,
    steps: usize,
    ode_steps: usize,
    max_n0: usize,
) -> Result<FockCrossCheck> {
    let p = spec.params;
    if max_n0 >= n_trunc {
        return Err(Error::InvalidParameter {
            name: "max_n0",
            value: max_n0 as f64,
        });
    }
    let model = HamiltonianModel::parametric_oscillator(n_trunc, p.mass, p.hbar, p.omega0)?;
    let prop = propagate_with_tolerance(&model, &spec.schedule, steps, p.hbar, UNITARY_TOL)?;
    let h0 = model.evaluate(p.omega0)?;
    let h_tau = model.evaluate(p.omega_tau)?;
    let analysis = WorkAnalysis::new(p.beta, &h0, &h_tau, &prop.unitary)?;

    let qstar = qstar_from_dynamics(spec, ode_steps)?;
    let measure = qstar.measure()?;
    let analytic = avg_work(measure, &p);
    let numeric_mf = mean_work(analysis.mf());
    let numeric_ttm = mean_work(analysis.ttm());

    let conditional = analysis.joint().conditional();
    let occupations: Vec<OccupationCheck> = (0..=max_n0)
        .map(|n0| {
            let numeric = conditional
                .row(n0)
                .iter()
                .enumerate()
                .map(|(n, pr)| n as f64 * pr)
                .sum();
            OccupationCheck {
                n0,
                numeric,
                analytic: mean_occupation(n0, measure),
            }
        })
        .collect();
    let max_occupation_deviation = occupations
        .iter()
        .map(|o| (o.numeric - o.analytic).abs())
        .fold(0.0, f64::max);

    let rho = analysis.rho_tau().as_matrix();
    let tail_start = (9 * n_trunc).div_ceil(10);
    let tail_occupancy: f64 = (tail_start..n_trunc).map(|i| rho[(i, i)].re).sum();

    Ok(FockCrossCheck {
        n_trunc,
        steps,
        qstar,
        analytic_mean_work: analytic,
        numeric_mean_work_mf: numeric_mf,
        numeric_mean_work_ttm: numeric_ttm,
        mean_work_relative_deviation: (numeric_mf - analytic).abs() / analytic.abs(),
        occupations,
        max_occupation_deviation,
        z_tilde_numeric: analysis.pseudo_gibbs().z_tilde(),
        z_tilde_analytic: pseudo_partition(measure, &p),
        unitarity_defect: prop.unitarity_defect,
        tail_occupancy,
        trusted: tail_occupancy < 1e-8 && prop.within_tolerance,
    })
}
