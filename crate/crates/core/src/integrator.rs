//! Explicit time stepping of the semi-discrete scheme.
//!
//! Two schemes are available: Euler–Maruyama on the Itô form
//! (drift `Fʰ + ½Sʰ`) and Heun on the Stratonovich form. Both optionally
//! renormalise every node after each step.

use rand::Rng;

use crate::dynamics::{self, PhysParams};
use crate::error::{Error, Result};
use crate::grid::{self, VectorField, WireGrid, ScalarField};
use crate::noise::{build_noise, check_smallness, NoiseModel, NoiseSpec, SmallnessInputs, DEFAULT_BDG_CONSTANT};
use crate::random::{stream_rng, StreamRng};
use crate::vec3::{self, Vec3};
use crate::velocity::SpinVelocity;

pub const DEFAULT_C_STAB: f64 = 0.2;

/// Projection below this norm is treated as a blow-up.
pub const PROJECTION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    EulerMaruyamaIto,
    HeunStratonovich,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `(tanh(x/w), sech(x/w), 0)`
    DomainWall { width: f64 },
    /// Constant field along `direction` (normalised).
    Uniform { direction: Vec3 },
    /// `(cos kx, sin kx, 0)`
    Spiral { wavenumber: f64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::DomainWall { width: 1.0 }
    }
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::DomainWall { width } if !(width.is_finite() && *width > 0.0) => {
                Err(Error::InvalidConfig(format!("domain wall width must be > 0, got {width}")))
            }
            Self::Uniform { direction } if !(vec3::is_finite(*direction) && vec3::norm(*direction) > 0.0) => {
                Err(Error::InvalidConfig("uniform direction must be a finite non-zero vector".into()))
            }
            Self::Spiral { wavenumber } if !wavenumber.is_finite() => {
                Err(Error::InvalidConfig("spiral wavenumber must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, grid: &WireGrid) -> VectorField {
        match *self {
            Self::DomainWall { width } => initial_domain_wall(grid, width),
            Self::Uniform { direction } => {
                VectorField::constant(grid.n(), vec3::scale(1.0 / vec3::norm(direction), direction))
            }
            Self::Spiral { wavenumber } => VectorField::from_fn(grid, |x| {
                let (s, c) = (wavenumber * x).sin_cos();
                [c, s, 0.0]
            }),
        }
    }
}

/// `m₀(x) = (tanh(x/w₀), sech(x/w₀), 0)`.
pub fn initial_domain_wall(grid: &WireGrid, w0: f64) -> VectorField {
    assert!(w0 > 0.0, "domain wall width must be positive");
    VectorField::from_fn(grid, |x| {
        let s = x / w0;
        [s.tanh(), 1.0 / s.cosh(), 0.0]
    })
}

/// Parameters for the estimate monitor and the smallness advisory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSettings {
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub b_p: f64,
    /// Exponent `w` of the weight `ρ_w` used by distance studies.
    pub weight: f64,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self { p: 1.0, epsilon: 0.5, delta: 0.1, b_p: DEFAULT_BDG_CONSTANT, weight: 1.0 }
    }
}

impl MonitorSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.p >= 1.0
            && self.p.is_finite()
            && self.epsilon.is_finite()
            && self.epsilon > 0.0
            && self.delta.is_finite()
            && self.delta > 0.0
            && self.b_p.is_finite()
            && self.b_p > 0.0
            && self.weight.is_finite()
            && self.weight >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid diagnostics settings {self:?}")))
        }
    }

    pub fn smallness_inputs(&self, params: &PhysParams, p: f64) -> SmallnessInputs {
        SmallnessInputs { alpha: params.alpha, gamma: params.gamma, p, delta: self.delta, b_p: self.b_p }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: PhysParams,
    pub grid: WireGrid,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub projection: bool,
    pub noise: NoiseSpec,
    pub velocity: SpinVelocity,
    pub initial: InitialCondition,
    pub seed: u64,
    /// Random stream within `seed`; Monte Carlo path `i` uses stream `i`.
    pub stream: u64,
    pub snapshot_stride: usize,
    pub c_stab: f64,
    pub cfl_override: bool,
    pub monitor: MonitorSettings,
}

impl SimConfig {
    /// Deterministic defaults on `grid`: `α = 1`, `γ = 0`, unit domain wall,
    /// Euler–Maruyama with projection, `dt = c_stab h²/2`, `T = 100 dt`.
    pub fn new(grid: WireGrid) -> Self {
        let dt = 0.5 * DEFAULT_C_STAB * grid.h() * grid.h();
        Self {
            params: PhysParams { alpha: 1.0, gamma: 0.0 },
            grid,
            dt,
            t_final: 100.0 * dt,
            scheme: Scheme::default(),
            projection: true,
            noise: NoiseSpec::none(),
            velocity: SpinVelocity::zero(),
            initial: InitialCondition::default(),
            seed: 0,
            stream: 0,
            snapshot_stride: 1,
            c_stab: DEFAULT_C_STAB,
            cfl_override: false,
            monitor: MonitorSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidConfig(format!("T must be > 0, got {}", self.t_final)));
        }
        if self.dt > self.t_final {
            return Err(Error::InvalidConfig(format!("dt = {} exceeds T = {}", self.dt, self.t_final)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidConfig("snapshot_stride must be >= 1".into()));
        }
        if !(self.c_stab.is_finite() && self.c_stab > 0.0) {
            return Err(Error::InvalidConfig(format!("c_stab must be > 0, got {}", self.c_stab)));
        }
        let h = self.grid.h();
        let limit = self.c_stab * h * h;
        if self.dt > limit && !self.cfl_override {
            return Err(Error::StabilityGate { dt: self.dt, h, c_stab: self.c_stab, limit });
        }
        self.noise.validate()?;
        self.velocity.validate()?;
        self.initial.validate()?;
        self.monitor.validate()
    }

    /// Number of steps; the last one is shortened to land exactly on `T`.
    pub fn step_count(&self) -> usize {
        let r = self.t_final / self.dt;
        let steps = (r - 1e-9 * r.max(1.0)).ceil();
        (steps as usize).max(1)
    }

    pub fn step_times(&self) -> Vec<f64> {
        let steps = self.step_count();
        (0..=steps).map(|i| if i == steps { self.t_final } else { i as f64 * self.dt }).collect()
    }
}

/// Everything a single step needs, built once per run.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub params: PhysParams,
    pub grid: WireGrid,
    pub noise: NoiseModel,
    pub velocity: SpinVelocity,
    pub scheme: Scheme,
    pub projection: bool,
}

impl Stepper {
    pub fn new(config: &SimConfig) -> Result<Self> {
        Ok(Self {
            params: config.params,
            grid: config.grid,
            noise: build_noise(&config.noise, &config.grid)?,
            velocity: config.velocity.clone(),
            scheme: config.scheme,
            projection: config.projection,
        })
    }

    pub fn step(&self, state: &VectorField, t: f64, dt: f64, dw: &ScalarField, step: usize) -> Result<VectorField> {
        match self.scheme {
            Scheme::EulerMaruyamaIto => step_em_ito(state, t, dt, dw, self, step),
            Scheme::HeunStratonovich => step_heun_strat(state, t, dt, dw, self, step),
        }
    }
}

fn finish(mut m: VectorField, projection: bool, step: usize) -> Result<VectorField> {
    if !m.is_finite() {
        return Err(Error::NonFinite { step });
    }
    if projection {
        for (node, v) in m.values_mut().iter_mut().enumerate() {
            let r = vec3::norm(*v);
            if r < PROJECTION_FLOOR {
                return Err(Error::DegenerateProjection { step, node, norm: r });
            }
            *v = vec3::scale(1.0 / r, *v);
        }
    }
    Ok(m)
}

/// `m + (Fʰ + ½Sʰ) dt + Gʰ dW`, then optional projection. `step` only
/// labels errors.
pub fn step_em_ito(
    state: &VectorField,
    t: f64,
    dt: f64,
    dw: &ScalarField,
    stepper: &Stepper,
    step: usize,
) -> Result<VectorField> {
    let v = stepper.velocity.at(t, &stepper.grid);
    let c = dynamics::ito_coefficients(state, &v, &stepper.noise, &stepper.params, &stepper.grid);
    let next = (0..state.len())
        .map(|k| vec3::axpy(vec3::axpy(state[k], dt, c.drift[k]), dw[k], c.diffusion[k]))
        .collect();
    finish(VectorField::new(next), stepper.projection, step)
}

/// One Heun step for `du = a(u) dt + b(u) ∘ dW`, with `coeffs(u) = (a, b)`.
pub fn heun_with(
    m: &VectorField,
    dt: f64,
    dw: &ScalarField,
    coeffs: impl Fn(&VectorField) -> (VectorField, VectorField),
) -> VectorField {
    let (a0, b0) = coeffs(m);
    let pred = VectorField::new(
        (0..m.len()).map(|k| vec3::axpy(vec3::axpy(m[k], dt, a0[k]), dw[k], b0[k])).collect(),
    );
    let (a1, b1) = coeffs(&pred);
    VectorField::new(
        (0..m.len())
            .map(|k| {
                let a = vec3::add(a0[k], a1[k]);
                let b = vec3::add(b0[k], b1[k]);
                vec3::axpy(vec3::axpy(m[k], 0.5 * dt, a), 0.5 * dw[k], b)
            })
            .collect(),
    )
}

/// Heun on the Stratonovich form with `a(u) = −u×(Δʰu + α u×Δʰu) + v Gʰ(u)`
/// and `b(u) = Gʰ(u)`; `v` is frozen at the left endpoint.
pub fn step_heun_strat(
    state: &VectorField,
    t: f64,
    dt: f64,
    dw: &ScalarField,
    stepper: &Stepper,
    step: usize,
) -> Result<VectorField> {
    let v = stepper.velocity.at(t, &stepper.grid);
    let next = heun_with(state, dt, dw, |u| {
        dynamics::stratonovich_coefficients(u, &v, &stepper.params, &stepper.grid)
    });
    finish(next, stepper.projection, step)
}

/// Quantities recorded at every time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    /// `½|∂ʰm|²`
    pub energy: f64,
    /// `max | |m| − 1 |`
    pub sphere_dev: f64,
    /// `|m×Δʰm|²`
    pub cross_lap_sq: f64,
    /// `|Δʰm|²`
    pub lap_sq: f64,
    /// `h Σ ⟨m, Δʰm⟩²`
    pub radial_lap_sq: f64,
    /// `⟨Δʰm, Gʰ(m) ΔW⟩` over the step that ended at `t` (zero at `t = 0`).
    pub m_h_increment: f64,
}

impl StepRecord {
    pub fn measure(m: &VectorField, grid: &WireGrid, t: f64, m_h_increment: f64) -> Self {
        let st = dynamics::Stencil::new(m, grid);
        let h = grid.h();
        let (mut e, mut dev, mut cl, mut l, mut rl) = (0.0, 0.0_f64, 0.0, 0.0, 0.0);
        for k in 0..grid.n() {
            e += vec3::norm_sq(st.du[k]);
            dev = dev.max((vec3::norm(m[k]) - 1.0).abs());
            cl += vec3::norm_sq(vec3::cross(m[k], st.lap[k]));
            l += vec3::norm_sq(st.lap[k]);
            rl += vec3::dot(m[k], st.lap[k]).powi(2);
        }
        Self {
            t,
            energy: 0.5 * h * e,
            sphere_dev: dev,
            cross_lap_sq: h * cl,
            lap_sq: h * l,
            radial_lap_sq: h * rl,
            m_h_increment,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: WireGrid,
    /// Times of the stored states.
    pub times: Vec<f64>,
    pub states: Vec<VectorField>,
    /// One record per time level, including `t = 0`.
    pub records: Vec<StepRecord>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &VectorField {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least the initial time")
    }
}

/// Advisory messages when the smallness conditions at `p = 1` fail.
pub fn smallness_warnings(config: &SimConfig, noise: &NoiseModel) -> Vec<String> {
    if noise.is_deterministic() {
        return Vec::new();
    }
    let inputs = config.monitor.smallness_inputs(&config.params, 1.0);
    match check_smallness(noise, &inputs) {
        Ok(r) if r.n1_positive && r.n2_positive => Vec::new(),
        Ok(r) => vec![format!(
            "noise smallness fails at p = 1: N1 = {:.4e}, N2 = {:.4e} (C_kappa = {:.4e}, ceiling {:.4e})",
            r.n1, r.n2, r.c_kappa, r.c_kappa_ceiling
        )],
        Err(e) => vec![format!("smallness check skipped: {e}")],
    }
}

/// Run from the configured initial condition.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let m0 = config.initial.sample(&config.grid);
    simulate_from(config, m0)
}

/// Run from an explicit initial state; noise comes from
/// `stream_rng(config.seed, config.stream)`.
pub fn simulate_from(config: &SimConfig, m0: VectorField) -> Result<Trajectory> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, config.stream);
    simulate_with_rng(config, m0, &mut rng)
}

pub fn simulate_with_rng<R: Rng + ?Sized>(config: &SimConfig, m0: VectorField, rng: &mut R) -> Result<Trajectory> {
    config.validate()?;
    if m0.len() != config.grid.n() {
        return Err(Error::InvalidConfig(format!(
            "initial state has {} nodes, grid has {}",
            m0.len(),
            config.grid.n()
        )));
    }
    if !m0.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    let stepper = Stepper::new(config)?;
    let grid = config.grid;
    let times = config.step_times();
    let steps = times.len() - 1;
    let stride = config.snapshot_stride;

    let mut m = m0;
    let mut out_times = vec![0.0];
    let mut states = vec![m.clone()];
    let mut records = Vec::with_capacity(steps + 1);
    records.push(StepRecord::measure(&m, &grid, 0.0, 0.0));
    for i in 0..steps {
        let (t, t1) = (times[i], times[i + 1]);
        let dt = t1 - t;
        let dw = stepper.noise.sample_increment(dt, rng);
        let inc = if stepper.noise.is_deterministic() { 0.0 } else { m_h_increment(&m, &dw, &stepper) };
        m = stepper.step(&m, t, dt, &dw, i + 1)?;
        records.push(StepRecord::measure(&m, &grid, t1, inc));
        if (i + 1) % stride == 0 || i + 1 == steps {
            out_times.push(t1);
            states.push(m.clone());
        }
    }
    Ok(Trajectory { grid, times: out_times, states, records, warnings: smallness_warnings(config, &stepper.noise) })
}

fn m_h_increment(m: &VectorField, dw: &ScalarField, stepper: &Stepper) -> f64 {
    let lap = grid::discrete_laplacian(m, &stepper.grid);
    let g = dynamics::diffusion_g(m, &stepper.params, &stepper.grid);
    stepper.grid.h() * (0..m.len()).map(|k| dw[k] * vec3::dot(lap[k], g[k])).sum::<f64>()
}

/// Convenience for callers that need the raw stream.
pub fn path_rng(config: &SimConfig) -> StreamRng {
    stream_rng(config.seed, config.stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::noise::{AmplitudeLaw, ModeFamily};

    fn wall_grid(h: f64) -> WireGrid {
        WireGrid::spanning(-5.0, 5.0, h, Boundary::Clamped).unwrap()
    }

    fn noisy_spec() -> NoiseSpec {
        NoiseSpec {
            family: ModeFamily::GaussianBumps { width: 1.0, spacing: 1.0, center: 0.0 },
            modes: 3,
            scale: AmplitudeLaw::Constant { sigma: 0.02 },
        }
    }

    #[test]
    fn domain_wall_is_unit() {
        let g = wall_grid(0.1);
        let m = initial_domain_wall(&g, 0.7);
        for v in m.values() {
            assert!((vec3::norm_sq(*v) - 1.0).abs() <= 1e-15);
        }
        let far = initial_domain_wall(&WireGrid::new(1.0, 3, 40.0, Boundary::Clamped).unwrap(), 1.0);
        assert!(vec3::norm(vec3::sub(far[2], [1.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn domain_wall_energy_converges() {
        // ½∫|m₀'|² = ½∫ sech²(x)/w² ... for w = 1 this is ∫ sech² /2 over ℝ = 1
        // on [-15, 15] the tail is negligible; high-resolution trapezoid oracle
        let exact = {
            let n = 200_000;
            let h = 30.0 / n as f64;
            (0..=n)
                .map(|i| {
                    let x = -15.0 + i as f64 * h;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * 0.5 / x.cosh().powi(2)
                })
                .sum::<f64>()
                * h
        };
        let mut prev = f64::INFINITY;
        for h in [0.2, 0.1, 0.05, 0.025] {
            let g = WireGrid::spanning(-15.0, 15.0, h, Boundary::Clamped).unwrap();
            let e = grid::exchange_energy(&initial_domain_wall(&g, 1.0), &g);
            let err = (e - exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn constant_state_is_fixed() {
        let g = wall_grid(0.2);
        let mut c = SimConfig::new(g);
        c.initial = InitialCondition::Uniform { direction: [0.0, 0.0, 2.0] };
        c.velocity = SpinVelocity::constant(1.0);
        for scheme in [Scheme::EulerMaruyamaIto, Scheme::HeunStratonovich] {
            c.scheme = scheme;
            let tr = simulate(&c).unwrap();
            assert_eq!(tr.final_state(), &VectorField::constant(g.n(), [0.0, 0.0, 1.0]));
        }
    }

    /// Explicit LLG step written out independently of the dynamics module.
    fn reference_llg_step(m: &[Vec3], h: f64, dt: f64, alpha: f64) -> Vec<Vec3> {
        let n = m.len();
        let cr = |a: Vec3, b: Vec3| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        (0..n)
            .map(|k| {
                let l = m[(k + 1).min(n - 1)];
                let r = m[k.saturating_sub(1)];
                let lap = [0, 1, 2].map(|i| (l[i] - 2.0 * m[k][i] + r[i]) / (h * h));
                let mxl = cr(m[k], lap);
                let mmxl = cr(m[k], mxl);
                [0, 1, 2].map(|i| m[k][i] + dt * (-mxl[i] - alpha * mmxl[i]))
            })
            .collect()
    }

    #[test]
    fn deterministic_step_matches_reference() {
        let g = wall_grid(0.1);
        let mut c = SimConfig::new(g);
        c.params = PhysParams::new(0.7, 0.0).unwrap();
        c.projection = false;
        let stepper = Stepper::new(&c).unwrap();
        let m0 = initial_domain_wall(&g, 1.0);
        let got = step_em_ito(&m0, 0.0, c.dt, &ScalarField::zeros(g.n()), &stepper, 1).unwrap();
        let want = reference_llg_step(m0.values(), g.h(), c.dt, 0.7);
        for (a, b) in got.values().iter().zip(&want) {
            assert!(vec3::norm(vec3::sub(*a, *b)) <= 1e-14);
        }
    }

    #[test]
    fn heun_scalar_identity() {
        let lambda = -3.0;
        let dt = 0.1;
        let m = VectorField::new(vec![[1.0, 2.0, -1.0]; 3]);
        let out = heun_with(&m, dt, &ScalarField::zeros(3), |u| (u.scaled(lambda), VectorField::zeros(3)));
        let f = 1.0 + lambda * dt + 0.5 * (lambda * dt).powi(2);
        for v in out.values() {
            assert!((v[0] - f).abs() < 1e-15 && (v[1] - 2.0 * f).abs() < 1e-15);
        }
    }

    #[test]
    fn one_step_run_equals_single_step() {
        let g = wall_grid(0.1);
        let mut c = SimConfig::new(g);
        c.noise = noisy_spec();
        c.t_final = c.dt;
        c.seed = 9;
        let tr = simulate(&c).unwrap();
        assert_eq!(tr.times, vec![0.0, c.dt]);
        let stepper = Stepper::new(&c).unwrap();
        let mut rng = stream_rng(9, 0);
        let dw = stepper.noise.sample_increment(c.dt, &mut rng);
        let m1 = step_em_ito(&initial_domain_wall(&g, 1.0), 0.0, c.dt, &dw, &stepper, 1).unwrap();
        assert_eq!(tr.final_state(), &m1);
    }

    #[test]
    fn projection_keeps_unit_length() {
        let g = wall_grid(0.1);
        let mut c = SimConfig::new(g);
        c.noise = noisy_spec();
        c.velocity = SpinVelocity::constant(0.5);
        c.params = PhysParams::new(1.0, 0.5).unwrap();
        for scheme in [Scheme::EulerMaruyamaIto, Scheme::HeunStratonovich] {
            c.scheme = scheme;
            let tr = simulate(&c).unwrap();
            assert!(tr.records.iter().all(|r| r.sphere_dev <= 1e-15));
        }
    }

    #[test]
    fn determinism_and_seeds() {
        let g = wall_grid(0.2);
        let mut c = SimConfig::new(g);
        c.noise = noisy_spec();
        c.seed = 4;
        let a = simulate(&c).unwrap();
        let b = simulate(&c).unwrap();
        assert_eq!(a, b);
        c.seed = 5;
        let d = simulate(&c).unwrap();
        assert_ne!(a.final_state(), d.final_state());
    }

    #[test]
    fn stride_counts() {
        let g = wall_grid(0.2);
        let mut c = SimConfig::new(g);
        c.t_final = 10.0 * c.dt;
        for (k, slices) in [(1, 11), (3, 5), (5, 3), (10, 2), (20, 2)] {
            c.snapshot_stride = k;
            let tr = simulate(&c).unwrap();
            assert_eq!(tr.states.len(), slices, "stride {k}");
            assert_eq!(tr.records.len(), 11);
            assert_eq!(tr.final_time(), c.t_final);
        }
    }

    #[test]
    fn truncated_last_step() {
        let g = wall_grid(0.2);
        let mut c = SimConfig::new(g);
        c.dt = 0.003;
        c.t_final = 0.01;
        let t = c.step_times();
        assert_eq!(t.len(), 5);
        assert_eq!(t[4], 0.01);
        assert!((t[4] - t[3] - 0.001).abs() < 1e-15);
        c.t_final = 0.3;
        c.dt = 0.001;
        assert_eq!(c.step_count(), 300);
    }

    #[test]
    fn gate_and_validation() {
        let g = wall_grid(0.1);
        let mut c = SimConfig::new(g);
        c.dt = 0.2 * 0.01 * 1.01;
        c.t_final = 1.0;
        assert!(matches!(c.validate(), Err(Error::StabilityGate { .. })));
        c.cfl_override = true;
        c.validate().unwrap();
        c.params.alpha = 0.0;
        assert!(c.validate().is_err());
        c.params.alpha = 1.0;
        c.t_final = c.dt / 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let g = wall_grid(0.1);
        let mut c = SimConfig::new(g);
        c.dt = 50.0 * g.h() * g.h();
        c.t_final = 200.0 * c.dt;
        c.cfl_override = true;
        c.projection = false;
        let err = simulate(&c).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn deterministic_energy_is_non_increasing() {
        let g = wall_grid(0.1);
        let mut c = SimConfig::new(g);
        c.t_final = 0.5;
        let tr = simulate(&c).unwrap();
        for w in tr.records.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-10 * (1.0 + w[0].energy));
        }
    }
}
