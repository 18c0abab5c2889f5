//! TOML run configuration.
//!
//! Sections are one level deep and unknown keys are rejected. Required keys:
//! `physics.alpha`, `grid.h`, `grid.n`, `time.dt`, `time.T`. Everything
//! else has a default:
//!
//! ```toml
//! [physics]
//! alpha = 1.0            # required, > 0
//! gamma = 0.0
//!
//! [grid]
//! h = 0.1                # required
//! n = 201                # required
//! origin = 0.0
//! boundary = "clamped"   # or "periodic"
//!
//! [time]
//! dt = 0.001             # required, <= c_stab * h^2 unless cfl_override
//! T = 1.0                # required
//! snapshot_stride = 1
//!
//! [scheme]
//! method = "em_ito"      # or "heun_strat"
//! projection = true
//! cfl_override = false
//! c_stab = 0.2
//!
//! [noise]
//! family = "none"        # "gaussian_bumps", "enveloped_fourier", "uniform"
//! J = 0
//! scale = "constant"     # "geometric" (uses ratio), "power" (uses exponent)
//! sigma = 0.0
//! ratio = 0.5
//! exponent = 2.0
//! width = 1.0            # gaussian_bumps
//! spacing = 1.0          # gaussian_bumps
//! center = 0.0           # gaussian_bumps
//! envelope = 5.0         # enveloped_fourier
//! omega = 1.0            # enveloped_fourier
//! value = 1.0            # uniform
//!
//! [velocity]
//! kind = "constant"      # "pulse" (value, t_on, t_off), "table" (times, values)
//! value = 0.0
//! envelope_width = 2.0   # optional Gaussian envelope in x
//!
//! [initial]
//! kind = "domain_wall"   # "uniform" (direction), "spiral" (wavenumber)
//! width = 1.0
//!
//! [run]
//! seed = 0
//!
//! [diagnostics]
//! p = 1.0
//! epsilon = 0.5
//! delta = 0.1
//! b_p = 4.0
//! weight = 1.0
//!
//! [study]
//! h_list = [0.1, 0.05, 0.025]   # default: h, h/2, h/4
//! paths = 8
//! perturbation = 1e-6
//! second_seed = 1               # optional, uniqueness study only
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::dynamics::PhysParams;
use crate::error::{Error, Result};
use crate::grid::{Boundary, WireGrid};
use crate::integrator::{InitialCondition, MonitorSettings, Scheme, SimConfig, DEFAULT_C_STAB};
use crate::noise::{AmplitudeLaw, ModeFamily, NoiseSpec, DEFAULT_BDG_CONSTANT};
use crate::velocity::{SpinVelocity, VelocityProfile};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    physics: RawPhysics,
    grid: RawGrid,
    time: RawTime,
    #[serde(default)]
    scheme: RawScheme,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    velocity: RawVelocity,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    diagnostics: RawDiagnostics,
    #[serde(default)]
    study: RawStudy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    alpha: f64,
    #[serde(default)]
    gamma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    h: f64,
    n: usize,
    #[serde(default)]
    origin: f64,
    #[serde(default)]
    boundary: Boundary,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: f64,
    #[serde(rename = "T")]
    t_final: f64,
    #[serde(default = "one")]
    snapshot_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawMethod {
    #[default]
    EmIto,
    HeunStrat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScheme {
    method: RawMethod,
    projection: bool,
    cfl_override: bool,
    c_stab: f64,
}

impl Default for RawScheme {
    fn default() -> Self {
        Self { method: RawMethod::EmIto, projection: true, cfl_override: false, c_stab: DEFAULT_C_STAB }
    }
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawFamily {
    #[default]
    None,
    GaussianBumps,
    EnvelopedFourier,
    Uniform,
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawScale {
    #[default]
    Constant,
    Geometric,
    Power,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawNoise {
    family: RawFamily,
    #[serde(rename = "J")]
    modes: usize,
    scale: RawScale,
    sigma: f64,
    ratio: f64,
    exponent: f64,
    width: f64,
    spacing: f64,
    center: f64,
    envelope: f64,
    omega: f64,
    value: f64,
}

impl Default for RawNoise {
    fn default() -> Self {
        Self {
            family: RawFamily::None,
            modes: 0,
            scale: RawScale::Constant,
            sigma: 0.0,
            ratio: 0.5,
            exponent: 2.0,
            width: 1.0,
            spacing: 1.0,
            center: 0.0,
            envelope: 5.0,
            omega: 1.0,
            value: 1.0,
        }
    }
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawVelocityKind {
    #[default]
    Constant,
    Pulse,
    Table,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawVelocity {
    kind: RawVelocityKind,
    value: f64,
    t_on: f64,
    t_off: f64,
    times: Vec<f64>,
    values: Vec<f64>,
    envelope_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawInitialKind {
    #[default]
    DomainWall,
    Uniform,
    Spiral,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawInitial {
    kind: RawInitialKind,
    width: f64,
    direction: [f64; 3],
    wavenumber: f64,
}

impl Default for RawInitial {
    fn default() -> Self {
        Self { kind: RawInitialKind::DomainWall, width: 1.0, direction: [0.0, 0.0, 1.0], wavenumber: 1.0 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRun {
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDiagnostics {
    p: f64,
    epsilon: f64,
    delta: f64,
    b_p: f64,
    weight: f64,
}

impl Default for RawDiagnostics {
    fn default() -> Self {
        let m = MonitorSettings::default();
        Self { p: m.p, epsilon: m.epsilon, delta: m.delta, b_p: DEFAULT_BDG_CONSTANT, weight: m.weight }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawStudy {
    h_list: Option<Vec<f64>>,
    paths: usize,
    perturbation: f64,
    second_seed: Option<u64>,
}

impl Default for RawStudy {
    fn default() -> Self {
        Self { h_list: None, paths: 8, perturbation: 1e-6, second_seed: None }
    }
}

/// Parameters of the `study` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySettings {
    pub h_list: Vec<f64>,
    pub paths: usize,
    pub perturbation: f64,
    pub second_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub study: StudySettings,
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let raw: Raw = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
    let params = PhysParams::new(raw.physics.alpha, raw.physics.gamma)?;
    let grid = WireGrid::new(raw.grid.h, raw.grid.n, raw.grid.origin, raw.grid.boundary)?;
    let n = &raw.noise;
    let scale = match n.scale {
        RawScale::Constant => AmplitudeLaw::Constant { sigma: n.sigma },
        RawScale::Geometric => AmplitudeLaw::Geometric { sigma: n.sigma, ratio: n.ratio },
        RawScale::Power => AmplitudeLaw::Power { sigma: n.sigma, exponent: n.exponent },
    };
    let noise = match n.family {
        RawFamily::None => NoiseSpec::none(),
        f => NoiseSpec {
            family: match f {
                RawFamily::GaussianBumps => {
                    ModeFamily::GaussianBumps { width: n.width, spacing: n.spacing, center: n.center }
                }
                RawFamily::EnvelopedFourier => ModeFamily::EnvelopedFourier { envelope: n.envelope, omega: n.omega },
                _ => ModeFamily::Uniform { value: n.value },
            },
            modes: n.modes,
            scale,
        },
    };
    let v = raw.velocity;
    let velocity = SpinVelocity {
        profile: match v.kind {
            RawVelocityKind::Constant => VelocityProfile::Constant { value: v.value },
            RawVelocityKind::Pulse => VelocityProfile::Pulse { value: v.value, t_on: v.t_on, t_off: v.t_off },
            RawVelocityKind::Table => VelocityProfile::Tabulated { times: v.times, values: v.values },
        },
        envelope_width: v.envelope_width,
    };
    let i = raw.initial;
    let initial = match i.kind {
        RawInitialKind::DomainWall => InitialCondition::DomainWall { width: i.width },
        RawInitialKind::Uniform => InitialCondition::Uniform { direction: i.direction },
        RawInitialKind::Spiral => InitialCondition::Spiral { wavenumber: i.wavenumber },
    };
    let d = raw.diagnostics;
    let sim = SimConfig {
        params,
        grid,
        dt: raw.time.dt,
        t_final: raw.time.t_final,
        scheme: match raw.scheme.method {
            RawMethod::EmIto => Scheme::EulerMaruyamaIto,
            RawMethod::HeunStrat => Scheme::HeunStratonovich,
        },
        projection: raw.scheme.projection,
        noise,
        velocity,
        initial,
        seed: raw.run.seed,
        stream: 0,
        snapshot_stride: raw.time.snapshot_stride,
        c_stab: raw.scheme.c_stab,
        cfl_override: raw.scheme.cfl_override,
        monitor: MonitorSettings { p: d.p, epsilon: d.epsilon, delta: d.delta, b_p: d.b_p, weight: d.weight },
    };
    sim.validate()?;
    let h = grid.h();
    let study = StudySettings {
        h_list: raw.study.h_list.unwrap_or_else(|| vec![h, h / 2.0, h / 4.0]),
        paths: raw.study.paths,
        perturbation: raw.study.perturbation,
        second_seed: raw.study.second_seed,
    };
    if !(study.perturbation.is_finite() && study.perturbation >= 0.0) {
        return Err(Error::InvalidConfig("study.perturbation must be finite and >= 0".into()));
    }
    Ok(RunConfig { sim, study })
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_run_config(&text)
}

/// Read and validate the simulation part of a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    load_run_config(path).map(|c| c.sim)
}
