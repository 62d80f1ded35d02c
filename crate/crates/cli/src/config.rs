//! Run configuration: a TOML file with `[model]`, `[schedule]`, `[run]`,
//! `[oscillator]` and `[verify]` sections, every key optional.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use qwork_core::hamiltonians::{DriveSchedule, HamiltonianModel, PauliAxis, ScheduleShape};
use qwork_core::linalg::{HermitianOperator, C64};
use qwork_core::oscillator::{OscillatorParams, DEFAULT_N_TRUNC, DEFAULT_ODE_STEPS};
use qwork_core::propagation::DEFAULT_STEPS;
use qwork_core::random::{random_hermitian, seeded};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
}

impl Preset {
    pub fn params(self) -> OscillatorParams {
        match self {
            Preset::Fig1 => OscillatorParams::fig1(),
            Preset::Fig2 => OscillatorParams::fig2(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindName {
    #[default]
    TwoLevel,
    Oscillator,
    Custom,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    #[default]
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeName {
    #[default]
    Linear,
    Smoothstep,
    Sudden,
    Constant,
    Tabulated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    #[default]
    Qstar,
    Tau,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKindName,
    /// Two-level transverse splitting.
    pub delta: Option<f64>,
    pub axis: Axis,
    /// Oscillator truncation.
    pub n_trunc: Option<usize>,
    pub mass: Option<f64>,
    /// Frequency of the Fock basis; defaults to the initial frequency.
    pub omega_ref: Option<f64>,
    /// Dimension of a random model.
    pub dim: Option<usize>,
    /// Custom model: real and optional imaginary parts of H(0) and H(1).
    pub h0: Option<Vec<Vec<f64>>>,
    pub h0_imag: Option<Vec<Vec<f64>>>,
    pub h1: Option<Vec<Vec<f64>>>,
    pub h1_imag: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub shape: ShapeName,
    pub duration: Option<f64>,
    pub lambda0: Option<f64>,
    pub lambda_tau: Option<f64>,
    pub knots: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub beta: Option<f64>,
    pub hbar: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorSection {
    pub preset: Option<Preset>,
    pub omega0: Option<f64>,
    pub omega_tau: Option<f64>,
    pub mass: Option<f64>,
    pub mode: SweepMode,
    pub qstar_min: Option<f64>,
    pub qstar_max: Option<f64>,
    pub points: Option<usize>,
    pub taus: Option<Vec<f64>>,
    pub shape: Option<ShapeName>,
    pub ode_steps: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub instances: Option<usize>,
    pub dephasing_pairs: Option<usize>,
    pub min_dim: Option<usize>,
    pub max_dim: Option<usize>,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub steps: Option<usize>,
    pub identity: Option<bool>,
    pub oscillator: Option<bool>,
    pub oscillator_tau: Option<f64>,
    pub oscillator_steps: Option<usize>,
    pub n_trunc: Option<usize>,
}

/// Raw file contents; every key optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub schedule: ScheduleSection,
    pub run: RunSection,
    pub oscillator: OscillatorSection,
    pub verify: VerifySection,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub preset: Option<Preset>,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.out.is_some() {
            self.run.out.clone_from(&o.out);
        }
        if o.seed.is_some() {
            self.run.seed = o.seed;
        }
        if o.preset.is_some() {
            self.oscillator.preset = o.preset;
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.run.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(0)
    }

    pub fn beta(&self) -> Result<f64, ConfigError> {
        positive("run.beta", self.run.beta.unwrap_or(1.0))
    }

    pub fn hbar(&self) -> Result<f64, ConfigError> {
        positive("run.hbar", self.run.hbar.unwrap_or(1.0))
    }

    pub fn steps(&self) -> Result<usize, ConfigError> {
        at_least("run.steps", self.run.steps.unwrap_or(DEFAULT_STEPS), 1)
    }

    /// Driven protocol for `ttm` and `mf`.
    pub fn protocol(&self) -> Result<Protocol, ConfigError> {
        let m = &self.model;
        let s = &self.schedule;
        let (default0, default_tau) = match m.kind {
            ModelKindName::TwoLevel => (-1.0, 1.0),
            ModelKindName::Oscillator => (1.0, 2.0),
            ModelKindName::Custom | ModelKindName::Random => (0.0, 1.0),
        };
        let lambda0 = finite("schedule.lambda0", s.lambda0.unwrap_or(default0))?;
        let lambda_tau = finite("schedule.lambda_tau", s.lambda_tau.unwrap_or(default_tau))?;
        let duration = positive("schedule.duration", s.duration.unwrap_or(1.0))?;
        let shape = match s.shape {
            ShapeName::Linear => ScheduleShape::Linear,
            ShapeName::Smoothstep => ScheduleShape::Smoothstep,
            ShapeName::Sudden => ScheduleShape::Sudden,
            ShapeName::Constant => ScheduleShape::Constant,
            ShapeName::Tabulated => {
                let knots = s
                    .knots
                    .as_ref()
                    .ok_or_else(|| invalid("schedule.knots", "required for the tabulated shape"))?;
                ScheduleShape::Tabulated(knots.iter().map(|k| (k[0], k[1])).collect())
            }
        };
        if s.knots.is_some() && s.shape != ShapeName::Tabulated {
            return Err(invalid("schedule.knots", "only allowed with shape = \"tabulated\""));
        }
        let schedule = DriveSchedule::ramp(shape, duration, lambda0, lambda_tau)
            .map_err(|e| invalid("schedule", e.to_string()))?;

        let model = match m.kind {
            ModelKindName::TwoLevel => {
                let axis = match m.axis {
                    Axis::X => PauliAxis::X,
                    Axis::Y => PauliAxis::Y,
                    Axis::Z => PauliAxis::Z,
                };
                HamiltonianModel::two_level(finite("model.delta", m.delta.unwrap_or(0.5))?, axis)
                    .map_err(|e| invalid("model.delta", e.to_string()))?
            }
            ModelKindName::Oscillator => {
                let (lo, _) = schedule.lambda_range();
                if lo <= 0.0 {
                    return Err(invalid("schedule", "oscillator frequencies must be positive"));
                }
                let n = at_least("model.n_trunc", m.n_trunc.unwrap_or(DEFAULT_N_TRUNC), 2)?;
                let mass = positive("model.mass", m.mass.unwrap_or(1.0))?;
                let omega_ref = positive("model.omega_ref", m.omega_ref.unwrap_or(lambda0))?;
                HamiltonianModel::parametric_oscillator(n, mass, self.hbar()?, omega_ref)
                    .map_err(|e| invalid("model", e.to_string()))?
            }
            ModelKindName::Custom => {
                let h0 = operator("model.h0", m.h0.as_ref(), m.h0_imag.as_ref())?;
                let h1 = operator("model.h1", m.h1.as_ref(), m.h1_imag.as_ref())?;
                HamiltonianModel::interpolating(h0, h1).map_err(|e| invalid("model.h1", e.to_string()))?
            }
            ModelKindName::Random => {
                let dim = at_least("model.dim", m.dim.unwrap_or(4), 1)?;
                let mut rng = seeded(self.seed());
                let h0 = random_hermitian(&mut rng, dim, 1.0);
                let h1 = random_hermitian(&mut rng, dim, 1.0);
                HamiltonianModel::interpolating(h0, h1).map_err(|e| invalid("model", e.to_string()))?
            }
        };
        if matches!(m.kind, ModelKindName::Custom | ModelKindName::Random) {
            let (lo, hi) = schedule.lambda_range();
            if lo < 0.0 || hi > 1.0 {
                return Err(invalid("schedule", "interpolating models need lambda within [0, 1]"));
            }
        }
        Ok(Protocol {
            model,
            schedule,
            beta: self.beta()?,
            hbar: self.hbar()?,
            steps: self.steps()?,
        })
    }

    pub fn oscillator_params(&self) -> Result<OscillatorParams, ConfigError> {
        let o = &self.oscillator;
        if let Some(preset) = o.preset {
            for (field, set) in [
                ("oscillator.omega0", o.omega0.is_some()),
                ("oscillator.omega_tau", o.omega_tau.is_some()),
                ("oscillator.mass", o.mass.is_some()),
            ] {
                if set {
                    return Err(invalid(field, "conflicts with the preset"));
                }
            }
            for (field, value) in [("run.beta", self.run.beta), ("run.hbar", self.run.hbar)] {
                if value.is_some_and(|v| v != 1.0) {
                    return Err(invalid(field, "presets fix beta = hbar = 1"));
                }
            }
            return Ok(preset.params());
        }
        OscillatorParams::new(
            positive("oscillator.omega0", o.omega0.unwrap_or(1.0))?,
            positive("oscillator.omega_tau", o.omega_tau.unwrap_or(2.0))?,
            self.beta()?,
            self.hbar()?,
            positive("oscillator.mass", o.mass.unwrap_or(1.0))?,
        )
        .map_err(|e| invalid("oscillator", e.to_string()))
    }

    pub fn sweep(&self) -> Result<SweepSettings, ConfigError> {
        let o = &self.oscillator;
        let shape = match o.shape.unwrap_or(ShapeName::Smoothstep) {
            ShapeName::Linear => ScheduleShape::Linear,
            ShapeName::Smoothstep => ScheduleShape::Smoothstep,
            ShapeName::Sudden => ScheduleShape::Sudden,
            _ => return Err(invalid("oscillator.shape", "must be linear, smoothstep or sudden")),
        };
        let qstar_min = finite("oscillator.qstar_min", o.qstar_min.unwrap_or(1.0))?;
        let qstar_max = finite("oscillator.qstar_max", o.qstar_max.unwrap_or(3.0))?;
        if qstar_min < 1.0 {
            return Err(invalid("oscillator.qstar_min", "Q* is at least 1"));
        }
        if qstar_max < qstar_min {
            return Err(invalid("oscillator.qstar_max", "below qstar_min"));
        }
        let taus = match &o.taus {
            Some(t) => {
                if t.is_empty() {
                    return Err(invalid("oscillator.taus", "must not be empty"));
                }
                for &v in t {
                    positive("oscillator.taus", v)?;
                }
                t.clone()
            }
            None => (0..=20).map(|k| 10f64.powf(-2.0 + 0.2 * k as f64)).collect(),
        };
        Ok(SweepSettings {
            mode: o.mode,
            qstar_min,
            qstar_max,
            points: at_least("oscillator.points", o.points.unwrap_or(41), 1)?,
            taus,
            shape,
            ode_steps: at_least("oscillator.ode_steps", o.ode_steps.unwrap_or(DEFAULT_ODE_STEPS), 100)?,
        })
    }

    pub fn verify_settings(&self) -> Result<VerifySettings, ConfigError> {
        let v = &self.verify;
        let min_dim = at_least("verify.min_dim", v.min_dim.unwrap_or(2), 1)?;
        let max_dim = at_least("verify.max_dim", v.max_dim.unwrap_or(8), min_dim)?;
        let beta_min = positive("verify.beta_min", v.beta_min.unwrap_or(0.1))?;
        let beta_max = positive("verify.beta_max", v.beta_max.unwrap_or(5.0))?;
        if beta_max < beta_min {
            return Err(invalid("verify.beta_max", "below beta_min"));
        }
        Ok(VerifySettings {
            seed: self.seed(),
            instances: v.instances.unwrap_or(200),
            dephasing_pairs: v.dephasing_pairs.unwrap_or(1000),
            min_dim,
            max_dim,
            beta_min,
            beta_max,
            steps: at_least("verify.steps", v.steps.unwrap_or(200), 1)?,
            identity: v.identity.unwrap_or(true),
            oscillator: v.oscillator.unwrap_or(false) || self.oscillator.preset.is_some(),
            oscillator_tau: positive("verify.oscillator_tau", v.oscillator_tau.unwrap_or(1.5))?,
            oscillator_steps: at_least(
                "verify.oscillator_steps",
                v.oscillator_steps.unwrap_or(DEFAULT_STEPS),
                1,
            )?,
            n_trunc: at_least("verify.n_trunc", v.n_trunc.unwrap_or(DEFAULT_N_TRUNC), 12)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Protocol {
    pub model: HamiltonianModel,
    pub schedule: DriveSchedule,
    pub beta: f64,
    pub hbar: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct SweepSettings {
    pub mode: SweepMode,
    pub qstar_min: f64,
    pub qstar_max: f64,
    pub points: usize,
    pub taus: Vec<f64>,
    pub shape: ScheduleShape,
    pub ode_steps: usize,
}

#[derive(Clone, Debug)]
pub struct VerifySettings {
    pub seed: u64,
    pub instances: usize,
    pub dephasing_pairs: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub steps: usize,
    pub identity: bool,
    pub oscillator: bool,
    pub oscillator_tau: f64,
    pub oscillator_steps: usize,
    pub n_trunc: usize,
}

fn finite(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is not finite")))
    }
}

fn positive(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} must be positive")))
    }
}

fn at_least(field: &'static str, v: usize, min: usize) -> Result<usize, ConfigError> {
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} must be at least {min}")))
    }
}

fn operator(
    field: &'static str,
    re: Option<&Vec<Vec<f64>>>,
    im: Option<&Vec<Vec<f64>>>,
) -> Result<HermitianOperator, ConfigError> {
    let re = re.ok_or_else(|| invalid(field, "required for the custom model"))?;
    let n = re.len();
    let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
    if n == 0 || !square(re) || im.is_some_and(|m| !square(m)) {
        return Err(invalid(field, "must be a nonempty square matrix (list of rows)"));
    }
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im.map_or(0.0, |m| m[i][j])));
    HermitianOperator::from_matrix(m).map_err(|e| invalid(field, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_uses_defaults() {
        let c = parse("").unwrap();
        let p = c.protocol().unwrap();
        assert_eq!(p.model.dim(), 2);
        assert_eq!(p.steps, DEFAULT_STEPS);
        assert_eq!(c.oscillator_params().unwrap(), OscillatorParams::fig1());
    }

    #[test]
    fn parse_error_names_line() {
        let err = parse("[run]\nbeta = 1.0\nsteps = \"many\"\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse("[run]\nbetta = 2.0\n").unwrap_err().to_string();
        assert!(err.contains("betta"), "{err}");
    }

    #[test]
    fn validation_names_field() {
        let c = parse("[run]\nbeta = -1.0\n").unwrap();
        let err = c.protocol().unwrap_err().to_string();
        assert!(err.contains("run.beta"), "{err}");
    }

    #[test]
    fn preset_conflicts_are_reported() {
        let mut c = parse("[oscillator]\nomega0 = 3.0\n").unwrap();
        c.apply(&Overrides {
            preset: Some(Preset::Fig2),
            ..Default::default()
        });
        assert!(c
            .oscillator_params()
            .unwrap_err()
            .to_string()
            .contains("oscillator.omega0"));
    }

    #[test]
    fn custom_model_reads_matrices() {
        let c = parse(
            "[model]\nkind = \"custom\"\nh0 = [[0.0, 0.0], [0.0, 1.0]]\nh1 = [[0.0, 1.0], [1.0, 0.0]]\nh1_imag = [[0.0, 0.5], [-0.5, 0.0]]\n",
        )
        .unwrap();
        let p = c.protocol().unwrap();
        let h = p.model.evaluate(1.0).unwrap();
        assert_eq!(h.as_matrix()[(0, 1)], C64::new(1.0, 0.5));
    }

    #[test]
    fn non_hermitian_custom_model_is_rejected() {
        let c = parse("[model]\nkind = \"custom\"\nh0 = [[0.0, 1.0], [0.0, 1.0]]\nh1 = [[1.0, 0.0], [0.0, 1.0]]\n")
            .unwrap();
        assert!(c.protocol().unwrap_err().to_string().contains("model.h0"));
    }

    #[test]
    fn tabulated_needs_knots() {
        let c = parse("[schedule]\nshape = \"tabulated\"\n").unwrap();
        assert!(c.protocol().unwrap_err().to_string().contains("schedule.knots"));
    }
}
