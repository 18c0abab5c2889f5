//! Randomised identity battery behind `lls check`.
//!
//! The coefficient operators are passed in so that a deliberately broken
//! implementation can be shown to fail.

use crate::dynamics::{self, PhysParams};
use crate::error::Result;
use crate::grid::{self, Boundary, ScalarField, VectorField, WireGrid};
use crate::integrator::SimConfig;
use crate::interp::{interp_norms, quad_interp, remainders, Remainder};
use crate::noise::{build_noise, NoiseModel};
use crate::random::{random_field, random_unit_field, stream_rng};
use crate::vec3::{self, dot};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

pub type DriftOp = fn(&VectorField, &ScalarField, &PhysParams, &WireGrid) -> VectorField;
pub type DiffusionOp = fn(&VectorField, &PhysParams, &WireGrid) -> VectorField;
pub type CorrectionOp = fn(&VectorField, &NoiseModel, &PhysParams, &WireGrid) -> VectorField;

#[derive(Debug, Clone, Copy)]
pub struct Operators {
    pub drift_f: DriftOp,
    pub diffusion_g: DiffusionOp,
    pub strat_s: CorrectionOp,
}

impl Default for Operators {
    fn default() -> Self {
        Self {
            drift_f: dynamics::drift_f,
            diffusion_g: dynamics::diffusion_g,
            strat_s: dynamics::strat_correction_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

struct Acc {
    name: &'static str,
    worst: f64,
}

impl Acc {
    fn new(name: &'static str) -> Self {
        Self { name, worst: 0.0 }
    }

    fn push(&mut self, residual: f64) {
        // NaN counts as a failure
        self.worst = if residual.is_nan() { f64::INFINITY } else { self.worst.max(residual) };
    }
}

/// Run every identity on `trials` random inputs on the configured grid.
pub fn identity_battery(config: &SimConfig, ops: &Operators, trials: usize) -> Result<Vec<CheckResult>> {
    config.validate()?;
    let g = config.grid;
    let p = config.params;
    let noise = build_noise(&config.noise, &config.grid)?;
    let k2 = noise.kappa_sq();
    let mut rng = stream_rng(config.seed, u64::MAX);
    let names = [
        "sphere: <F,u> = 0",
        "sphere: <G,u> = 0",
        "sphere: <S,u> + kappa^2 |G|^2 = 0",
        "sphere: <F + S/2, u> + kappa^2 |G|^2 / 2 = 0",
        "calculus: <du,dv> + <lap u,v> = 0",
        "calculus: <u,lap u> = -(|du|^2 + |du-|^2)/2",
        "calculus: d(du) = (lap u)+",
        "calculus: |lap u|^2 = |u x lap u|^2 + h sum <u,lap u>^2",
        "interp: |D2 ubar| = |lap u|",
        "interp: |D ubar| <= 3 |du|",
        "interp: C1 knot jumps",
        "interp: uhat = ubar - R0 ubar",
    ];
    let mut acc: Vec<Acc> = names.iter().map(|n| Acc::new(n)).collect();
    let h = g.h();
    for trial in 0..trials {
        let u = random_unit_field(&mut rng, g.n());
        let w = random_field(&mut rng, g.n());
        let t = trial as f64 * config.dt;
        let v = config.velocity.at(t, &g);
        let f = (ops.drift_f)(&u, &v, &p, &g);
        let gg = (ops.diffusion_g)(&u, &p, &g);
        let s = (ops.strat_s)(&u, &noise, &p, &g);
        let du = grid::forward_diff(&u, &g);
        let dback = grid::backward_diff(&u, &g);
        let lap = grid::discrete_laplacian(&u, &g);
        for k in 0..g.n() {
            let scale_f = vec3::norm(f[k]).max(f64::MIN_POSITIVE);
            acc[0].push(dot(f[k], u[k]).abs() / scale_f);
            let scale_g = vec3::norm(gg[k]).max(f64::MIN_POSITIVE);
            acc[1].push(dot(gg[k], u[k]).abs() / scale_g);
            let g2 = vec3::norm_sq(gg[k]);
            let scale_s = (k2[k] * (g2 + vec3::norm(lap[k]))).max(vec3::norm(s[k])).max(f64::MIN_POSITIVE);
            acc[2].push((dot(s[k], u[k]) + k2[k] * g2).abs() / scale_s);
            let d = vec3::axpy(f[k], 0.5, s[k]);
            let scale_d = scale_s + scale_f;
            acc[3].push((dot(d, u[k]) + 0.5 * k2[k] * g2).abs() / scale_d);
            let expect = -0.5 * (vec3::norm_sq(du[k]) + vec3::norm_sq(dback[k]));
            acc[5].push((dot(u[k], lap[k]) - expect).abs() / expect.abs().max(1.0));
        }
        // summation by parts
        let dw = grid::forward_diff(&w, &g);
        let a = grid::inner(&du, &dw, &g, None);
        let b = grid::inner(&lap, &w, &g, None);
        let scale = grid::l2_norm_sq(&du, &g).sqrt() * grid::l2_norm_sq(&dw, &g).sqrt();
        acc[4].push((a + b).abs() / scale.max(f64::MIN_POSITIVE));
        // ∂∂u = (Δu)⁺, away from the clamped right end
        let ddu = grid::forward_diff(&du, &g);
        let last = match g.boundary() {
            Boundary::Periodic => g.n(),
            Boundary::Clamped => g.n() - 1,
        };
        for k in 0..last {
            let r = vec3::norm(vec3::sub(ddu[k], lap[g.neighbor(k, 1)]));
            acc[6].push(r / vec3::norm(lap[g.neighbor(k, 1)]).max(1.0));
        }
        // decomposition
        let cross = VectorField::new((0..g.n()).map(|k| vec3::cross(u[k], lap[k])).collect());
        let radial: f64 = h * (0..g.n()).map(|k| dot(u[k], lap[k]).powi(2)).sum::<f64>();
        let l = grid::l2_norm_sq(&lap, &g);
        acc[7].push((l - grid::l2_norm_sq(&cross, &g) - radial).abs() / l.max(f64::MIN_POSITIVE));
        // interpolation
        let q = quad_interp(&u, &g);
        let n = interp_norms(&q);
        // ū only covers the cells, which drop the last node of a clamped grid
        let lap_norm = (h * (0..g.cell_count()).map(|k| vec3::norm_sq(lap[k])).sum::<f64>()).sqrt();
        acc[8].push((n.d2_l2 - lap_norm).abs() / lap_norm.max(f64::MIN_POSITIVE));
        let dnorm = grid::l2_norm_sq(&du, &g).sqrt();
        acc[9].push((n.d_l2 - 3.0 * dnorm).max(0.0));
        let (jv, jd) = q.knot_jumps();
        acc[10].push(jv.max(jd * h));
        let r = remainders(&q, 2)?;
        for (pt, r0) in r.points.iter().zip(r.values(Remainder::R0)) {
            acc[11].push(vec3::norm(vec3::sub(vec3::sub(pt.u, r0), u[pt.cell])));
        }
    }
    Ok(acc
        .into_iter()
        .map(|a| CheckResult { name: a.name, max_residual: a.worst, tolerance: DEFAULT_TOLERANCE })
        .collect())
}
