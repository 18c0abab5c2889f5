//! Estimate monitors and the h-studies built on the simulator.

use rayon::prelude::*;

use crate::dynamics::PhysParams;
use crate::error::{Error, Result};
use crate::grid::{self, VectorField, WeightProfile, WireGrid};
use crate::integrator::{simulate, simulate_from, MonitorSettings, SimConfig, StepRecord, Trajectory};
use crate::interp::{quad_interp, weighted_distance};
use crate::noise::{build_noise, smallness_constants, NoiseModel};
use crate::stats::{exp_rate, mean_and_se};
use crate::vec3;

/// Constants entering the uniform energy estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConstants {
    pub n1: f64,
    pub n2: f64,
    pub c1_eps: f64,
    pub c2_eps: f64,
    /// `2α − C_{2,ε}`
    pub dissipation_margin: f64,
}

impl EstimateConstants {
    pub fn dissipative(&self) -> bool {
        self.dissipation_margin > 0.0
    }
}

/// ```text
/// C_{1,ε} = [(γ²+1)² C_κ⁴ + 4|γ| C_κ² + 2 C_v² (1+γ²)] / (2ε²) + 2(1+γ²) C_κ²
/// C_{2,ε} = (4γ²+2) C_κ² + ε² (3 + 2|γ| C_κ²)
/// ```
pub fn estimate_constants(c_kappa: f64, c_v: f64, params: &PhysParams, s: &MonitorSettings) -> EstimateConstants {
    let g2 = params.gamma * params.gamma;
    let ga = params.gamma.abs();
    let k2 = c_kappa * c_kappa;
    let e2 = s.epsilon * s.epsilon;
    let c1 = ((g2 + 1.0).powi(2) * k2 * k2 + 4.0 * ga * k2 + 2.0 * c_v * c_v * (1.0 + g2)) / (2.0 * e2)
        + 2.0 * (1.0 + g2) * k2;
    let c2 = (4.0 * g2 + 2.0) * k2 + e2 * (3.0 + 2.0 * ga * k2);
    let (n1, n2) = smallness_constants(c_kappa, &s.smallness_inputs(params, s.p));
    EstimateConstants { n1, n2, c1_eps: c1, c2_eps: c2, dissipation_margin: 2.0 * params.alpha - c2 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    /// `sup_t ½|∂ʰm|²`
    pub sup_energy: f64,
    /// `∫₀ᵀ |m×Δʰm|² dt`, left-endpoint rule
    pub cross_lap_integral: f64,
    /// `∫₀ᵀ |Δʰm|² dt`
    pub lap_integral: f64,
    /// `∫₀ᵀ h Σ ⟨m, Δʰm⟩² dt`
    pub radial_lap_integral: f64,
    pub max_sphere_dev: f64,
    /// `Σ ⟨Δʰm, Gʰ(m) ΔW⟩` over the run.
    pub m_h_final: f64,
    pub constants: EstimateConstants,
    pub settings: MonitorSettings,
}

/// Left-endpoint time integral of a per-record quantity.
pub fn time_integral(records: &[StepRecord], f: impl Fn(&StepRecord) -> f64) -> f64 {
    records.windows(2).map(|w| (w[1].t - w[0].t) * f(&w[0])).sum()
}

pub fn monitor(
    traj: &Trajectory,
    noise: &NoiseModel,
    params: &PhysParams,
    c_v: f64,
    settings: &MonitorSettings,
) -> EstimateReport {
    let r = &traj.records;
    EstimateReport {
        sup_energy: r.iter().map(|x| x.energy).fold(0.0, f64::max),
        cross_lap_integral: time_integral(r, |x| x.cross_lap_sq),
        lap_integral: time_integral(r, |x| x.lap_sq),
        radial_lap_integral: time_integral(r, |x| x.radial_lap_sq),
        max_sphere_dev: r.iter().map(|x| x.sphere_dev).fold(0.0, f64::max),
        m_h_final: r.iter().map(|x| x.m_h_increment).sum(),
        constants: estimate_constants(noise.c_kappa(), c_v, params, settings),
        settings: *settings,
    }
}

/// Run `config` and report its estimate quantities.
pub fn monitor_run(config: &SimConfig) -> Result<(Trajectory, EstimateReport)> {
    let traj = simulate(config)?;
    let noise = build_noise(&config.noise, &config.grid)?;
    let rep = monitor(&traj, &noise, &config.params, config.velocity.c_v(), &config.monitor);
    Ok((traj, rep))
}

fn level_config(base: &SimConfig, h: f64) -> Result<SimConfig> {
    let mut c = base.clone();
    c.grid = base.grid.with_spacing(h)?;
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformRow {
    pub h: f64,
    pub paths: usize,
    pub aborted: usize,
    pub sup_energy_mean: f64,
    pub sup_energy_se: f64,
    pub cross_lap_mean: f64,
    pub cross_lap_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformStudy {
    pub rows: Vec<UniformRow>,
    pub warnings: Vec<String>,
}

/// Monte Carlo means of `sup_t energy` and `∫|m×Δʰm|²` for every `h`.
/// Path `i` uses stream `i` of the base seed at every level, so increments
/// are coupled across `h`. Paths that blow up are counted and excluded.
pub fn uniform_in_h_study(base: &SimConfig, h_list: &[f64], paths: usize) -> Result<UniformStudy> {
    if paths == 0 {
        return Err(Error::InvalidConfig("study needs at least one path".into()));
    }
    let mut rows = Vec::with_capacity(h_list.len());
    let mut warnings = Vec::new();
    for &h in h_list {
        let mut cfg = level_config(base, h)?;
        cfg.snapshot_stride = cfg.step_count();
        let outcomes: Vec<Result<Option<(f64, f64)>>> = (0..paths)
            .into_par_iter()
            .map(|i| {
                let mut c = cfg.clone();
                c.stream = i as u64;
                match simulate(&c) {
                    Ok(t) => Ok(Some((
                        t.records.iter().map(|r| r.energy).fold(0.0, f64::max),
                        time_integral(&t.records, |r| r.cross_lap_sq),
                    ))),
                    Err(Error::NonFinite { .. } | Error::DegenerateProjection { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        let mut sup = Vec::new();
        let mut cross = Vec::new();
        let mut aborted = 0;
        for o in outcomes {
            match o? {
                Some((a, b)) => {
                    sup.push(a);
                    cross.push(b);
                }
                None => aborted += 1,
            }
        }
        let noise = build_noise(&cfg.noise, &cfg.grid)?;
        for w in crate::integrator::smallness_warnings(&cfg, &noise) {
            warnings.push(format!("h = {h}: {w}"));
        }
        let (sm, ss) = mean_and_se(&sup);
        let (cm, cs) = mean_and_se(&cross);
        rows.push(UniformRow {
            h,
            paths: sup.len(),
            aborted,
            sup_energy_mean: sm,
            sup_energy_se: ss,
            cross_lap_mean: cm,
            cross_lap_se: cs,
        });
    }
    Ok(UniformStudy { rows, warnings })
}

/// Each spacing must equal or halve the previous one.
pub fn check_nested(h_list: &[f64]) -> Result<()> {
    if h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::NotNested("spacings must be positive".into()));
    }
    for w in h_list.windows(2) {
        let same = (w[1] - w[0]).abs() <= 1e-12 * w[0];
        let half = (w[1] - 0.5 * w[0]).abs() <= 1e-12 * w[0];
        if !(same || half) {
            return Err(Error::NotNested(format!("{} does not follow {} (equal or half required)", w[1], w[0])));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h_coarse: f64,
    pub h_fine: f64,
    /// `sup_t |m̄ʰ − m̄^{h'}|_{L²_w}` over the stored times.
    pub sup_l2w: f64,
    /// `(∫₀ᵀ |m̄ʰ − m̄^{h'}|²_{H¹_w} dt)^{1/2}`, left-endpoint rule.
    pub l2_h1w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub weight: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Pairwise distances between consecutive levels, all driven by the same
/// mode increments and sharing `dt`.
pub fn convergence_study(base: &SimConfig, h_list: &[f64]) -> Result<ConvergenceStudy> {
    check_nested(h_list)?;
    let configs = h_list.iter().map(|&h| level_config(base, h)).collect::<Result<Vec<_>>>()?;
    let runs = configs.par_iter().map(simulate).collect::<Result<Vec<_>>>()?;
    let w = base.monitor.weight;
    let rows = runs
        .windows(2)
        .zip(h_list.windows(2))
        .map(|(pair, hs)| {
            let (a, b) = (&pair[0], &pair[1]);
            let mut sup = 0.0_f64;
            let mut h1 = Vec::with_capacity(a.states.len());
            for (ma, mb) in a.states.iter().zip(&b.states) {
                let (l, d) = weighted_distance(&quad_interp(ma, &a.grid), &quad_interp(mb, &b.grid), w);
                sup = sup.max(l);
                h1.push(d * d);
            }
            let integral: f64 = a.times.windows(2).zip(&h1).map(|(t, v)| (t[1] - t[0]) * v).sum();
            ConvergenceRow { h_coarse: hs[0], h_fine: hs[1], sup_l2w: sup, l2_h1w: integral.sqrt() }
        })
        .collect();
    Ok(ConvergenceStudy { weight: w, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub perturbation: f64,
    pub times: Vec<f64>,
    /// `|m₁(t) − m₂(t)|_{L²_{h,w}}`
    pub distances: Vec<f64>,
    /// Rate of the exponential fit to the non-zero distances.
    pub growth_rate: Option<f64>,
}

/// `m₀ + ε e^{−x²} ẑ`, renormalised; `ε = 0` returns `m₀` untouched.
pub fn perturb_initial(m0: &VectorField, grid: &WireGrid, eps: f64) -> VectorField {
    if eps == 0.0 {
        return m0.clone();
    }
    VectorField::new(
        (0..grid.n())
            .map(|k| {
                let x = grid.x(k);
                let v = vec3::axpy(m0[k], eps * (-x * x).exp(), [0.0, 0.0, 1.0]);
                vec3::scale(1.0 / vec3::norm(v), v)
            })
            .collect(),
    )
}

/// Two runs driven by the same noise path (or by `second_seed` when given)
/// from `m₀` and its perturbation.
pub fn uniqueness_check(config: &SimConfig, perturbation: f64, second_seed: Option<u64>) -> Result<UniquenessReport> {
    config.validate()?;
    let m0 = config.initial.sample(&config.grid);
    let m0b = perturb_initial(&m0, &config.grid, perturbation);
    let mut other = config.clone();
    if let Some(s) = second_seed {
        other.seed = s;
    }
    let (a, b) = rayon::join(|| simulate_from(config, m0), || simulate_from(&other, m0b));
    let (a, b) = (a?, b?);
    let weight = WeightProfile::new(config.monitor.weight, &config.grid)?;
    let distances: Vec<f64> = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            let d = x.sub(y);
            grid::inner(&d, &d, &config.grid, Some(&weight)).sqrt()
        })
        .collect();
    let growth_rate = exp_rate(&a.times, &distances);
    Ok(UniquenessReport { perturbation, times: a.times, distances, growth_rate })
}
