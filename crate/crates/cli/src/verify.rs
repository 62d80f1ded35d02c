//! Seeded verification of every identity and bound over random protocols.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use qwork_core::hamiltonians::ScheduleShape;
use qwork_core::linalg::{eig_hermitian, HermitianOperator, SpectralDecomposition, UnitaryOperator};
use qwork_core::oscillator::{fock_cross_check, FockCrossCheck, OscillatorParams, OscillatorSpec, DEFAULT_ODE_STEPS};
use qwork_core::propagation::propagate;
use qwork_core::random::{random_basis, random_density, random_hermitian, random_protocol, seeded};
use qwork_core::thermo::{dephase, measurement_entropy_change};
use qwork_core::work::{exp_average, mean_work, WorkAnalysis, BASIS_CONVENTION};

use crate::config::VerifySettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `worst <= tolerance`.
    AtMost,
    /// Passes when `worst >= -tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    pub quantity: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub samples: usize,
    pub within_tolerance: bool,
}

impl Check {
    fn new(
        group: &'static str,
        name: &'static str,
        quantity: &'static str,
        comparison: Comparison,
        tolerance: f64,
        values: impl IntoIterator<Item = f64>,
    ) -> Self {
        let mut samples = 0;
        let mut worst = match comparison {
            Comparison::AtMost => f64::NEG_INFINITY,
            Comparison::AtLeast => f64::INFINITY,
        };
        let mut nan = false;
        for v in values {
            samples += 1;
            nan |= v.is_nan();
            worst = match comparison {
                Comparison::AtMost => worst.max(v),
                Comparison::AtLeast => worst.min(v),
            };
        }
        let within_tolerance = !nan
            && samples > 0
            && match comparison {
                Comparison::AtMost => worst <= tolerance,
                Comparison::AtLeast => worst >= -tolerance,
            };
        Self {
            group,
            name,
            quantity,
            worst: if nan { f64::NAN } else { worst },
            tolerance,
            comparison,
            samples,
            within_tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub dephasing_pairs: usize,
    pub basis_convention: &'static str,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<FockCrossCheck>,
    pub all_within_tolerance: bool,
}

/// Residuals of one protocol.
#[derive(Clone, Copy, Debug)]
struct Residuals {
    jarzynski: f64,
    mf_identity: f64,
    modified_jarzynski: f64,
    closed_form_s: f64,
    first_law: f64,
    slack19: f64,
    slack21_minus_19: f64,
    s_rel: f64,
    jensen: f64,
    measurement_entropy: f64,
    unitarity: f64,
}

fn residuals(
    beta: f64,
    h0: &HermitianOperator,
    h_tau: &HermitianOperator,
    u: &UnitaryOperator,
) -> qwork_core::Result<Residuals> {
    let a = WorkAnalysis::new(beta, h0, h_tau, u)?;
    let j = a.jarzynski_report();
    let m = a.modified_jarzynski_report();
    let b = a.bounds_report();
    let f = a.first_law_report()?;
    let mf_avg = exp_average(a.mf(), beta);
    Ok(Residuals {
        jarzynski: j.jarzynski_residual,
        mf_identity: (mf_avg * a.initial().z() / a.pseudo_gibbs().z_tilde() - 1.0).abs(),
        modified_jarzynski: m.residual,
        closed_form_s: m.closed_form_residual,
        first_law: f.residual,
        slack19: b.slack19,
        slack21_minus_19: (b.slack21 - b.slack19).abs(),
        s_rel: m.s_rel,
        jensen: mean_work(a.mf()) + mf_avg.ln() / beta,
        measurement_entropy: a.measurement_entropy_change()?,
        unitarity: u.defect(),
    })
}

fn batch_checks(group: &'static str, rs: &[Residuals], strict: bool) -> Vec<Check> {
    use Comparison::*;
    // The identity protocol is exact up to rounding, so it gets the tighter tolerance.
    let tol = |t: f64| if strict { t.min(1e-12) } else { t };
    vec![
        Check::new(
            group,
            "ttm_jarzynski",
            "|<exp(-beta W)>_TTM Z0 / Ztau - 1|",
            AtMost,
            tol(1e-10),
            rs.iter().map(|r| r.jarzynski),
        ),
        Check::new(
            group,
            "mf_exp_average",
            "|<exp(-beta W)>_MF Z0 / Z_tilde - 1|",
            AtMost,
            tol(1e-10),
            rs.iter().map(|r| r.mf_identity),
        ),
        Check::new(
            group,
            "modified_jarzynski",
            "|<exp(-beta W)>_MF - exp(-beta dF - S)|",
            AtMost,
            tol(1e-10),
            rs.iter().map(|r| r.modified_jarzynski),
        ),
        Check::new(
            group,
            "relative_entropy_closed_form",
            "|S_matrix - ln(Ztau / Z_tilde)|",
            AtMost,
            tol(1e-8),
            rs.iter().map(|r| r.closed_form_s),
        ),
        Check::new(
            group,
            "first_law",
            "max |<W>_paradigm - (tr rho_tau H_tau - tr rho_0 H_0)|",
            AtMost,
            tol(1e-10),
            rs.iter().map(|r| r.first_law),
        ),
        Check::new(
            group,
            "information_bound",
            "beta <W> - beta dF - S",
            AtLeast,
            tol(1e-9),
            rs.iter().map(|r| r.slack19),
        ),
        Check::new(
            group,
            "information_free_energy_bound",
            "|slack21 - slack19|",
            AtMost,
            tol(1e-12),
            rs.iter().map(|r| r.slack21_minus_19),
        ),
        Check::new(
            group,
            "relative_entropy_non_negative",
            "S(rho_tilde || rho_eq)",
            AtLeast,
            tol(1e-10),
            rs.iter().map(|r| r.s_rel),
        ),
        Check::new(
            group,
            "jensen",
            "<W>_MF + ln<exp(-beta W)>_MF / beta",
            AtLeast,
            tol(1e-9),
            rs.iter().map(|r| r.jensen),
        ),
        Check::new(
            group,
            "measurement_entropy",
            "S(rho^M) - S(rho_tau)",
            AtLeast,
            tol(1e-10),
            rs.iter().map(|r| r.measurement_entropy),
        ),
        Check::new(
            group,
            "unitarity",
            "max |U^dagger U - I|",
            AtMost,
            1e-9,
            rs.iter().map(|r| r.unitarity),
        ),
    ]
}

/// Identity protocol `U = I`, `H_tau = H_0` on a random Hamiltonian.
pub fn identity_checks(seed: u64, dim: usize, beta: f64) -> qwork_core::Result<Vec<Check>> {
    let h = random_hermitian(&mut seeded(seed), dim, 1.0);
    let r = residuals(beta, &h, &h, &UnitaryOperator::identity(dim))?;
    let mut checks = batch_checks("identity", &[r], true);
    checks.push(Check::new(
        "identity",
        "zero_slack",
        "|beta <W> - beta dF - S|",
        Comparison::AtMost,
        1e-12,
        [r.slack19.abs()],
    ));
    checks.push(Check::new(
        "identity",
        "zero_relative_entropy",
        "|S|",
        Comparison::AtMost,
        1e-12,
        [r.s_rel.abs()],
    ));
    Ok(checks)
}

/// Random driven protocols: dimensions, inverse temperatures and schedules drawn from the seed.
pub fn random_batch(s: &VerifySettings) -> qwork_core::Result<Vec<Check>> {
    let mut rng = seeded(s.seed);
    let protocols: Vec<_> = (0..s.instances)
        .map(|_| random_protocol(&mut rng, s.min_dim..=s.max_dim, s.beta_min..=s.beta_max))
        .collect();
    let rs: Vec<Residuals> = protocols
        .par_iter()
        .map(|p| {
            let u = propagate(&p.model, &p.schedule, s.steps, 1.0)?;
            residuals(p.beta, &p.h0, &p.h_tau, &u.unitary)
        })
        .collect::<qwork_core::Result<_>>()?;
    Ok(batch_checks("random_batch", &rs, false))
}

/// Spectral decomposition with some degenerate levels: energies drawn from a small integer set.
fn degenerate_spectrum<R: Rng>(rng: &mut R, dim: usize) -> qwork_core::Result<SpectralDecomposition> {
    let basis = random_basis(rng, dim);
    let mut energies: Vec<f64> = (0..dim).map(|_| rng.random_range(0..3) as f64).collect();
    energies.sort_by(f64::total_cmp);
    SpectralDecomposition::from_basis(&energies, basis.basis().clone(), None)
}

/// Measurement-entropy and energy-invariance checks for random `(rho, basis)` pairs.
pub fn dephasing_checks(s: &VerifySettings) -> qwork_core::Result<Vec<Check>> {
    let mut rng = seeded(s.seed ^ 0x9e37_79b9_7f4a_7c15);
    let pairs: Vec<_> = (0..s.dephasing_pairs)
        .map(|i| {
            let dim = rng.random_range(s.min_dim..=s.max_dim);
            let rho = random_density(&mut rng, dim);
            let spec = if i % 2 == 0 {
                eig_hermitian(&random_hermitian(&mut rng, dim, 1.0), None)
            } else {
                degenerate_spectrum(&mut rng, dim)?
            };
            Ok((rho, spec))
        })
        .collect::<qwork_core::Result<_>>()?;
    let out: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(rho, spec)| {
            let h = spec.reconstruct();
            let dephased = dephase(rho, spec)?;
            let shift = (dephased.energy(&h)? - rho.energy(&h)?).abs();
            Ok((measurement_entropy_change(rho, spec)?, shift))
        })
        .collect::<qwork_core::Result<_>>()?;
    Ok(vec![
        Check::new(
            "dephasing",
            "measurement_entropy",
            "S(rho^M) - S(rho)",
            Comparison::AtLeast,
            1e-10,
            out.iter().map(|o| o.0),
        ),
        Check::new(
            "dephasing",
            "energy_invariance",
            "|tr(rho^M H) - tr(rho H)|",
            Comparison::AtMost,
            1e-12,
            out.iter().map(|o| o.1),
        ),
    ])
}

pub fn oscillator_checks(
    params: &OscillatorParams,
    s: &VerifySettings,
) -> qwork_core::Result<(Vec<Check>, FockCrossCheck)> {
    let spec = OscillatorSpec::with_ramp(*params, ScheduleShape::Smoothstep, s.oscillator_tau)?;
    let r = fock_cross_check(&spec, s.n_trunc, s.oscillator_steps, DEFAULT_ODE_STEPS, 10)?;
    use Comparison::*;
    let checks = vec![
        Check::new(
            "oscillator",
            "mean_work",
            "|<W>_numeric - <W>_closed_form| / |<W>_closed_form|",
            AtMost,
            1e-3,
            [r.mean_work_relative_deviation],
        ),
        Check::new(
            "oscillator",
            "mean_occupation",
            "max_{n0 <= 10} |<n_tau>_numeric - <n_tau>_closed_form|",
            AtMost,
            1e-3,
            [r.max_occupation_deviation],
        ),
        Check::new(
            "oscillator",
            "pseudo_partition",
            "|Z_tilde_numeric - Z_tilde_closed_form|",
            AtMost,
            1e-4,
            [(r.z_tilde_numeric - r.z_tilde_analytic).abs()],
        ),
        Check::new(
            "oscillator",
            "unitarity",
            "max |U^dagger U - I|",
            AtMost,
            1e-9,
            [r.unitarity_defect],
        ),
        Check::new(
            "oscillator",
            "tail_occupancy",
            "population of the top 10% of Fock levels",
            AtMost,
            1e-8,
            [r.tail_occupancy],
        ),
        Check::new(
            "oscillator",
            "wronskian",
            "max |X Y' - X' Y + 1|",
            AtMost,
            1e-8,
            [r.qstar.wronskian_defect],
        ),
    ];
    Ok((checks, r))
}

pub fn run(s: &VerifySettings, oscillator: Option<&OscillatorParams>) -> qwork_core::Result<VerifyReport> {
    let mut checks = Vec::new();
    if s.identity {
        checks.extend(identity_checks(s.seed, s.max_dim, 1.0)?);
    }
    if s.instances > 0 {
        checks.extend(random_batch(s)?);
    }
    if s.dephasing_pairs > 0 {
        checks.extend(dephasing_checks(s)?);
    }
    let osc = match oscillator {
        Some(p) if s.oscillator => {
            let (c, r) = oscillator_checks(p, s)?;
            checks.extend(c);
            Some(r)
        }
        _ => None,
    };
    let all = checks.iter().all(|c| c.within_tolerance);
    Ok(VerifyReport {
        seed: s.seed,
        instances: s.instances,
        dephasing_pairs: s.dephasing_pairs,
        basis_convention: BASIS_CONVENTION,
        checks,
        oscillator: osc,
        all_within_tolerance: all,
    })
}
