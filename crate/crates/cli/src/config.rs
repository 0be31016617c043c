//! Scenario files: one TOML document with sections for the initial state,
//! target, toughness, control, solver, branch policy, output and
//! verification tolerances.

use debond::branch::{BranchMode, BranchPolicy};
use debond::forward::{Scheme, SolverConfig};
use debond::{ControlSignal, InitialState, Regularity, SampledFunction, TargetState, Toughness};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_RESOLUTION: usize = 2000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing section or field `{0}`")]
    Missing(&'static str),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, e: impl ToString) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: e.to_string() }
}

/// A function on an interval, either as a sample table or a preset sampled
/// at `n` intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Samples {
        points: Vec<[f64; 2]>,
    },
    Constant {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Linear {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    /// A·sin(ωx + φ)
    Sine {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

impl FunctionSpec {
    fn value(&self, x: f64) -> f64 {
        match *self {
            FunctionSpec::Samples { .. } => unreachable!(),
            FunctionSpec::Constant { c, .. } => c,
            FunctionSpec::Linear { a, b, .. } => a + b * x,
            FunctionSpec::Sine { amplitude, omega, phase, .. } => amplitude * (omega * x + phase).sin(),
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match *self {
            FunctionSpec::Samples { .. } => unreachable!(),
            FunctionSpec::Constant { .. } => 0.0,
            FunctionSpec::Linear { b, .. } => b,
            FunctionSpec::Sine { amplitude, omega, phase, .. } => amplitude * omega * (omega * x + phase).cos(),
        }
    }

    fn resolution(&self) -> usize {
        match *self {
            FunctionSpec::Samples { .. } => 0,
            FunctionSpec::Constant { n, .. } | FunctionSpec::Linear { n, .. } | FunctionSpec::Sine { n, .. } => {
                n.unwrap_or(DEFAULT_RESOLUTION)
            }
        }
    }

    /// Samples on [a, b]; sample tables must cover exactly that interval.
    pub fn sample(&self, a: f64, b: f64, field: &str) -> Result<SampledFunction, ConfigError> {
        match self {
            FunctionSpec::Samples { points } => {
                let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
                let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
                let f = SampledFunction::new(xs, ys).map_err(|e| invalid(field, e))?;
                let (lo, hi) = f.domain();
                let tol = 1e-9 * (b - a).abs().max(1.0);
                if (lo - a).abs() > tol || (hi - b).abs() > tol {
                    return Err(invalid(field, format!("samples cover [{lo}, {hi}], expected [{a}, {b}]")));
                }
                Ok(f)
            }
            spec => SampledFunction::from_fn(a, b, spec.resolution(), |x| spec.value(x)).map_err(|e| invalid(field, e)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegularityTag {
    C01,
    C1,
}

impl From<RegularityTag> for Regularity {
    fn from(r: RegularityTag) -> Self {
        match r {
            RegularityTag::C01 => Regularity::C01,
            RegularityTag::C1 => Regularity::C1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub ell0: f64,
    pub y0: FunctionSpec,
    pub y1: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ToughnessSpec {
    Constant { constant: f64 },
    Table { samples: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSpec {
    pub u: FunctionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    Euler,
    Heun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeTag,
    #[serde(default = "default_eps")]
    pub speed_clamp_eps: f64,
    #[serde(default = "default_cap")]
    pub horizon_cap: f64,
}

fn default_h() -> f64 {
    1e-3
}
fn default_scheme() -> SchemeTag {
    SchemeTag::Heun
}
fn default_eps() -> f64 {
    1e-9
}
fn default_cap() -> f64 {
    100.0
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { h: default_h(), scheme: default_scheme(), speed_clamp_eps: default_eps(), horizon_cap: default_cap() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PolicyTag {
    PreferStatic,
    PreferMoving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    /// Integrate the differential inclusion backward from T.
    Computed,
    /// The branch resting at the target length.
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    #[serde(default = "default_policy")]
    pub policy: PolicyTag,
    #[serde(default = "default_kind")]
    pub kind: BranchKind,
}

fn default_policy() -> PolicyTag {
    PolicyTag::PreferStatic
}
fn default_kind() -> BranchKind {
    BranchKind::Computed
}

impl Default for BranchSpec {
    fn default() -> Self {
        Self { policy: default_policy(), kind: default_kind() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySpec {
    #[serde(default = "default_tol")]
    pub front_tol: f64,
    #[serde(default = "default_tol")]
    pub displacement_tol: f64,
    #[serde(default = "default_velocity_tol")]
    pub velocity_tol: f64,
}

fn default_tol() -> f64 {
    1e-2
}
fn default_velocity_tol() -> f64 {
    1e-1
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { front_tol: default_tol(), displacement_tol: default_tol(), velocity_tol: default_velocity_tol() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_regularity")]
    pub regularity: RegularityTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateSpec>,
    pub toughness: ToughnessSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub branch: BranchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn default_regularity() -> RegularityTag {
    RegularityTag::C01
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        if !(cfg.horizon > 0.0) || !cfg.horizon.is_finite() {
            return Err(invalid("T", format!("must be positive, got {}", cfg.horizon)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity.into()
    }

    pub fn initial_state(&self) -> Result<InitialState, ConfigError> {
        let s = self.initial.as_ref().ok_or(ConfigError::Missing("initial"))?;
        let y0 = s.y0.sample(0.0, s.ell0, "initial.y0")?;
        let y1 = s.y1.sample(0.0, s.ell0, "initial.y1")?;
        InitialState::new(s.ell0, y0, y1, self.regularity()).map_err(|e| invalid("initial", e))
    }

    pub fn target_state(&self) -> Result<TargetState, ConfigError> {
        let s = self.target.as_ref().ok_or(ConfigError::Missing("target"))?;
        let y0 = s.y0.sample(0.0, s.ell0, "target.y0")?;
        let y1 = s.y1.sample(0.0, s.ell0, "target.y1")?;
        TargetState::new(s.ell0, y0, y1, self.regularity()).map_err(|e| invalid("target", e))
    }

    pub fn toughness(&self) -> Result<Toughness, ConfigError> {
        match &self.toughness {
            ToughnessSpec::Constant { constant } => Toughness::constant(*constant).map_err(|e| invalid("toughness", e)),
            ToughnessSpec::Table { samples } => {
                let xs = samples.iter().map(|p| p[0]).collect();
                let ys = samples.iter().map(|p| p[1]).collect();
                let f = SampledFunction::new(xs, ys).map_err(|e| invalid("toughness.samples", e))?;
                Toughness::sampled(f).map_err(|e| invalid("toughness.samples", e))
            }
        }
    }

    /// Sample tables give a piecewise-linear control; presets give a smooth one.
    pub fn control(&self) -> Result<ControlSignal, ConfigError> {
        let spec = &self.control.as_ref().ok_or(ConfigError::Missing("control"))?.u;
        let t = self.horizon;
        match spec {
            FunctionSpec::Samples { .. } => {
                let u = spec.sample(0.0, t, "control.u")?;
                ControlSignal::piecewise_linear(u).map_err(|e| invalid("control.u", e))
            }
            _ => ControlSignal::from_fn(t, spec.resolution(), |x| spec.value(x), |x| spec.slope(x))
                .map_err(|e| invalid("control.u", e)),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            h: s.h,
            scheme: match s.scheme {
                SchemeTag::Euler => Scheme::Euler,
                SchemeTag::Heun => Scheme::Heun,
            },
            speed_clamp_eps: s.speed_clamp_eps,
            horizon_cap: s.horizon_cap,
        }
    }

    pub fn branch_policy(&self) -> Result<BranchPolicy, ConfigError> {
        let mode = match self.branch.policy {
            PolicyTag::PreferStatic => BranchMode::PreferStatic,
            PolicyTag::PreferMoving => BranchMode::PreferMoving,
        };
        BranchPolicy::new(mode, self.regularity == RegularityTag::C1, self.solver.h).map_err(|e| invalid("solver.h", e))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.as_ref().map_or_else(|| PathBuf::from("out"), |o| o.dir.clone())
    }
}
