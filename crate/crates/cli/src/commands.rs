use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use qwork_core::oscillator::{
    figure_sweep, figure_sweep_tau, monotonicity, qstar_grid, OscillatorParams, SweepRow, TauSweepRow,
};
use qwork_core::propagation::{propagate, PropagatorResult};
use qwork_core::work::{
    exp_average, mean_work, BoundsReport, FirstLawReport, JarzynskiReport, ModifiedJarzynskiReport, WorkAnalysis,
    WorkDistribution, BASIS_CONVENTION,
};

use crate::config::{ConfigError, Protocol, RunConfig, SweepMode};
use crate::output::{to_csv, to_json, write_file};
use crate::verify;

pub const TTM_CSV: &str = "ttm_distribution.csv";
pub const TTM_JSON: &str = "ttm_summary.json";
pub const MF_CSV: &str = "mf_distribution.csv";
pub const MF_JSON: &str = "mf_summary.json";
pub const SWEEP_CSV: &str = "oscillator_sweep.csv";
pub const SWEEP_JSON: &str = "oscillator_sweep.json";
pub const VERIFY_JSON: &str = "verify_report.json";

pub const SWEEP_HEADER: [&str; 4] = ["qstar", "beta_w", "beta_df", "beta_df_plus_s"];
pub const TAU_SWEEP_HEADER: [&str; 5] = ["tau", "qstar", "beta_w", "beta_df", "beta_df_plus_s"];

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Physics(#[from] qwork_core::Error),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        // Numerical or I/O failures are also reported as configuration problems:
        // exit status 1 is reserved for tolerance violations.
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    ToleranceViolation,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::ToleranceViolation => 1,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Success
        } else {
            Status::ToleranceViolation
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Serialize)]
struct ProtocolInfo {
    dim: usize,
    beta: f64,
    hbar: f64,
    steps: usize,
    duration: f64,
    lambda0: f64,
    lambda_tau: f64,
    unitarity_defect: f64,
}

fn run_protocol(p: &Protocol) -> Result<(WorkAnalysis, PropagatorResult), CommandError> {
    let prop = propagate(&p.model, &p.schedule, p.steps, p.hbar)?;
    let h0 = p.model.evaluate(p.schedule.lambda0())?;
    let h_tau = p.model.evaluate(p.schedule.lambda_tau())?;
    Ok((WorkAnalysis::new(p.beta, &h0, &h_tau, &prop.unitary)?, prop))
}

fn info(p: &Protocol, prop: &PropagatorResult) -> ProtocolInfo {
    ProtocolInfo {
        dim: p.model.dim(),
        beta: p.beta,
        hbar: p.hbar,
        steps: prop.steps,
        duration: p.schedule.duration(),
        lambda0: p.schedule.lambda0(),
        lambda_tau: p.schedule.lambda_tau(),
        unitarity_defect: prop.unitarity_defect,
    }
}

fn distribution_csv(d: &WorkDistribution) -> String {
    to_csv(&["w", "prob"], d.atoms().iter().map(|a| vec![a.work, a.probability]))
}

#[derive(Serialize)]
struct TtmSummary {
    mean_work: f64,
    exp_avg: f64,
    z0: f64,
    ztau: f64,
    delta_f: f64,
    jarzynski_residual: f64,
    atoms: usize,
    protocol: ProtocolInfo,
}

pub fn cmd_ttm(config: &RunConfig) -> Result<Outcome, CommandError> {
    let p = config.protocol()?;
    let (a, prop) = run_protocol(&p)?;
    let JarzynskiReport {
        exp_avg,
        z0,
        ztau,
        delta_f,
        jarzynski_residual,
    } = a.jarzynski_report();
    let summary = TtmSummary {
        mean_work: mean_work(a.ttm()),
        exp_avg,
        z0,
        ztau,
        delta_f,
        jarzynski_residual,
        atoms: a.ttm().atoms().len(),
        protocol: info(&p, &prop),
    };
    let dir = config.out_dir();
    let files = vec![
        write_file(&dir, TTM_CSV, &distribution_csv(a.ttm()))?,
        write_file(&dir, TTM_JSON, &to_json(&summary))?,
    ];
    Ok(Outcome {
        status: Status::from_ok(jarzynski_residual <= 1e-10 && prop.within_tolerance),
        files,
        summary: format!(
            "<W> = {:.10}, Jarzynski residual = {jarzynski_residual:.3e}",
            summary.mean_work
        ),
    })
}

#[derive(Serialize)]
struct MfSummary {
    mean_work: f64,
    exp_avg: f64,
    z_tilde: f64,
    s_rel_matrix: f64,
    s_rel_closed_form: f64,
    residual_eq18: f64,
    slack_eq19: f64,
    delta_f: f64,
    s_rel_infinite: bool,
    work_values: Vec<f64>,
    basis_convention: &'static str,
    degenerate_initial_levels: usize,
    modified_jarzynski: ModifiedJarzynskiReport,
    bounds: BoundsReport,
    first_law: FirstLawReport,
    protocol: ProtocolInfo,
}

pub fn cmd_mf(config: &RunConfig) -> Result<Outcome, CommandError> {
    let p = config.protocol()?;
    let (a, prop) = run_protocol(&p)?;
    let m = a.modified_jarzynski_report();
    let b = a.bounds_report();
    let f = a.first_law_report()?;
    let ok = m.residual <= 1e-10
        && m.closed_form_residual <= 1e-8
        && b.slack19 >= -1e-9
        && f.residual <= 1e-10
        && prop.within_tolerance;
    let summary = MfSummary {
        mean_work: mean_work(a.mf()),
        exp_avg: exp_average(a.mf(), p.beta),
        z_tilde: m.z_tilde,
        s_rel_matrix: m.s_rel,
        s_rel_closed_form: m.s_rel_closed_form,
        residual_eq18: m.residual,
        slack_eq19: b.slack19,
        delta_f: m.delta_f,
        s_rel_infinite: m.s_rel_infinite,
        work_values: a.mf_values().to_vec(),
        basis_convention: BASIS_CONVENTION,
        degenerate_initial_levels: a.degenerate_initial_levels(),
        modified_jarzynski: m,
        bounds: b,
        first_law: f,
        protocol: info(&p, &prop),
    };
    let dir = config.out_dir();
    let files = vec![
        write_file(&dir, MF_CSV, &distribution_csv(a.mf()))?,
        write_file(&dir, MF_JSON, &to_json(&summary))?,
    ];
    Ok(Outcome {
        status: Status::from_ok(ok),
        files,
        summary: format!(
            "<W> = {:.10}, S = {:.10}, modified Jarzynski residual = {:.3e}, slack = {:.3e}",
            summary.mean_work, summary.s_rel_matrix, summary.residual_eq18, summary.slack_eq19
        ),
    })
}

#[derive(Serialize)]
struct Monotonicity {
    beta_w: bool,
    beta_df: bool,
    beta_df_plus_s: bool,
}

#[derive(Serialize)]
struct SweepReport<'a, R: Serialize> {
    params: OscillatorParams,
    mode: &'static str,
    /// Largest violation of `beta W >= beta dF + S >= beta dF` over the rows (0 when satisfied).
    ordering_violation: f64,
    non_decreasing: Monotonicity,
    rows: &'a [R],
}

/// `max(0, -(beta_w - beta_df_plus_s), -(beta_df_plus_s - beta_df))` over the rows.
pub fn ordering_violation(rows: &[SweepRow]) -> f64 {
    rows.iter()
        .map(|r| (r.beta_df_plus_s - r.beta_w).max(r.beta_df - r.beta_df_plus_s).max(0.0))
        .fold(0.0, f64::max)
}

pub fn cmd_oscillator(config: &RunConfig) -> Result<Outcome, CommandError> {
    let params = config.oscillator_params()?;
    let s = config.sweep()?;
    let dir = config.out_dir();
    let (rows, csv, json, mode) = match s.mode {
        SweepMode::Qstar => {
            let rows = figure_sweep(&params, &qstar_grid(s.qstar_min, s.qstar_max, s.points))?;
            let csv = to_csv(
                &SWEEP_HEADER,
                rows.iter()
                    .map(|r| vec![r.qstar, r.beta_w, r.beta_df, r.beta_df_plus_s]),
            );
            (rows.clone(), csv, None, "qstar")
        }
        SweepMode::Tau => {
            let tau_rows: Vec<TauSweepRow> = figure_sweep_tau(&params, &s.shape, &s.taus, s.ode_steps)?;
            let rows: Vec<SweepRow> = tau_rows.iter().map(|t| t.row).collect();
            let csv = to_csv(
                &TAU_SWEEP_HEADER,
                tau_rows
                    .iter()
                    .map(|t| vec![t.tau, t.row.qstar, t.row.beta_w, t.row.beta_df, t.row.beta_df_plus_s]),
            );
            (rows, csv, Some(tau_rows), "tau")
        }
    };
    let violation = ordering_violation(&rows);
    let [w, f, fs] = monotonicity(&rows);
    let non_decreasing = Monotonicity {
        beta_w: w,
        beta_df: f,
        beta_df_plus_s: fs,
    };
    let json = match &json {
        Some(tau_rows) => to_json(&SweepReport {
            params,
            mode,
            ordering_violation: violation,
            non_decreasing,
            rows: tau_rows,
        }),
        None => to_json(&SweepReport {
            params,
            mode,
            ordering_violation: violation,
            non_decreasing,
            rows: &rows,
        }),
    };
    let files = vec![write_file(&dir, SWEEP_CSV, &csv)?, write_file(&dir, SWEEP_JSON, &json)?];
    Ok(Outcome {
        // Rounding can make the tight points (Q* w_tau = w0) cross zero at the 1e-15 level.
        status: Status::from_ok(violation <= 1e-12),
        files,
        summary: format!("{} rows, ordering violation {violation:.3e}", rows.len()),
    })
}

pub fn cmd_verify(config: &RunConfig) -> Result<Outcome, CommandError> {
    let settings = config.verify_settings()?;
    let params = if settings.oscillator {
        Some(config.oscillator_params()?)
    } else {
        None
    };
    let report = verify::run(&settings, params.as_ref())?;
    let path = write_file(&config.out_dir(), VERIFY_JSON, &to_json(&report))?;
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.within_tolerance)
        .map(|c| format!("{}/{}", c.group, c.name))
        .collect();
    let summary = if failed.is_empty() {
        format!("{} checks within tolerance", report.checks.len())
    } else {
        format!(
            "{} of {} checks violated: {}",
            failed.len(),
            report.checks.len(),
            failed.join(", ")
        )
    };
    Ok(Outcome {
        status: Status::from_ok(report.all_within_tolerance),
        files: vec![path],
        summary,
    })
}
