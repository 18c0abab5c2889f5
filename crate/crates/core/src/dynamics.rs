//! Coefficients of the semi-discrete scheme
//!
//! ```text
//! dm = (Fʰ(m) + ½ Sʰ(m)) dt + Gʰ(m) dW
//! ```
//!
//! with, nodewise,
//!
//! ```text
//! Fʰ(u) = u×(u×v∂ʰu) + γ u×v∂ʰu − u×(Δʰu + α u×Δʰu)
//! Gʰ(u) = u×(u×∂ʰu) + γ u×∂ʰu
//! Sʰ(u) = 𝒢ʰ_κ(u) + κκ' [u×(u×Gʰ(u)) + γ u×Gʰ(u)]
//! 𝒢ʰ_κ  = ½((κ²)⁻ + κ²) G₁ + κ² G₂ + (κ²)⁻ G₃
//! G₁    = (γ² − |u|²) u×(u×Δʰu) − 2γ|u|² u×Δʰu
//! G₂    = −γ² ∂ʰu×(u×∂ʰu) − |u×∂ʰu|² u
//! G₃    = 2γ ⟨u, ∂ʰu⁻⟩ u×∂ʰu
//! ```
//!
//! For unit fields `⟨Fʰ,u⟩ = ⟨Gʰ,u⟩ = 0` and `⟨Sʰ,u⟩ = −κ²|Gʰ|²` hold at
//! every node, which is what keeps the time-continuous scheme on the sphere.
//! The factor 2 in `G₃` is kept as written; it only matters where
//! `⟨u, ∂ʰu⁻⟩ ≠ 0`, which vanishes as `h → 0` on the sphere.
//!
//! [`continuous`] holds the continuum coefficients, used as oracles.

use crate::error::{Error, Result};
use crate::grid::{self, Direction, ScalarField, VectorField, WireGrid};
use crate::noise::NoiseModel;
use crate::vec3::{self, cross, dot, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl PhysParams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        let p = Self { alpha, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidConfig(format!("damping requires alpha > 0, got {}", self.alpha)));
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidConfig("gamma must be finite".into()));
        }
        Ok(())
    }
}

/// `∂ʰu`, `∂ʰu⁻` and `Δʰu` at every node.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub du: Vec<Vec3>,
    pub du_back: Vec<Vec3>,
    pub lap: Vec<Vec3>,
}

impl Stencil {
    pub fn new(u: &VectorField, grid: &WireGrid) -> Self {
        assert_eq!(u.len(), grid.n(), "field length does not match grid");
        let v = u.values();
        let inv_h = 1.0 / grid.h();
        let n = grid.n();
        let mut du = Vec::with_capacity(n);
        let mut du_back = Vec::with_capacity(n);
        let mut lap = Vec::with_capacity(n);
        for k in 0..n {
            let up = v[grid.neighbor(k, 1)];
            let um = v[grid.neighbor(k, -1)];
            let f = vec3::scale(inv_h, vec3::sub(up, v[k]));
            let b = vec3::scale(inv_h, vec3::sub(v[k], um));
            du.push(f);
            du_back.push(b);
            lap.push(vec3::scale(inv_h, vec3::sub(f, b)));
        }
        Self { du, du_back, lap }
    }
}

#[inline]
fn g_node(u: Vec3, du: Vec3, gamma: f64) -> Vec3 {
    let uxd = cross(u, du);
    vec3::axpy(cross(u, uxd), gamma, uxd)
}

/// `−u×(Δu + α u×Δu)`
#[inline]
fn llg_node(u: Vec3, lap: Vec3, alpha: f64) -> Vec3 {
    let uxl = cross(u, lap);
    vec3::scale(-1.0, cross(u, vec3::axpy(lap, alpha, uxl)))
}

#[inline]
fn f_node(u: Vec3, du: Vec3, lap: Vec3, v: f64, p: &PhysParams) -> Vec3 {
    let transport = g_node(u, vec3::scale(v, du), p.gamma);
    vec3::add(transport, llg_node(u, lap, p.alpha))
}

/// The four pieces of `Sʰ` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratParts {
    pub g1: Vec3,
    pub g2: Vec3,
    pub g3: Vec3,
    /// `u×(u×Gʰ) + γ u×Gʰ`, the factor multiplying `κκ'`.
    pub transport: Vec3,
}

#[inline]
fn strat_parts_node(u: Vec3, du: Vec3, du_back: Vec3, lap: Vec3, gamma: f64) -> StratParts {
    let u2 = vec3::norm_sq(u);
    let g2c = gamma * gamma;
    let uxl = cross(u, lap);
    let g1 = vec3::add(vec3::scale(g2c - u2, cross(u, uxl)), vec3::scale(-2.0 * gamma * u2, uxl));
    let uxd = cross(u, du);
    let g2 = vec3::add(vec3::scale(-g2c, cross(du, uxd)), vec3::scale(-vec3::norm_sq(uxd), u));
    let g3 = vec3::scale(2.0 * gamma * dot(u, du_back), uxd);
    let g = g_node(u, du, gamma);
    let uxg = cross(u, g);
    let transport = vec3::axpy(cross(u, uxg), gamma, uxg);
    StratParts { g1, g2, g3, transport }
}

#[inline]
fn s_node(parts: &StratParts, k2: f64, k2_back: f64, kkp: f64) -> Vec3 {
    let mut s = vec3::scale(0.5 * (k2_back + k2), parts.g1);
    s = vec3::axpy(s, k2, parts.g2);
    s = vec3::axpy(s, k2_back, parts.g3);
    vec3::axpy(s, kkp, parts.transport)
}

fn check(u: &VectorField, grid: &WireGrid) {
    assert_eq!(u.len(), grid.n(), "field length does not match grid");
}

/// `Fʰ(u)` with the velocity field `v_now` at the current time.
pub fn drift_f(u: &VectorField, v_now: &ScalarField, params: &PhysParams, grid: &WireGrid) -> VectorField {
    check(u, grid);
    assert_eq!(v_now.len(), grid.n());
    let st = Stencil::new(u, grid);
    VectorField::new(
        (0..grid.n()).map(|k| f_node(u[k], st.du[k], st.lap[k], v_now[k], params)).collect(),
    )
}

/// `Gʰ(u)`.
pub fn diffusion_g(u: &VectorField, params: &PhysParams, grid: &WireGrid) -> VectorField {
    check(u, grid);
    let du = grid::forward_diff(u, grid);
    VectorField::new((0..grid.n()).map(|k| g_node(u[k], du[k], params.gamma)).collect())
}

/// `−u×(Δʰu + α u×Δʰu)`, the exchange part of the drift.
pub fn llg_drift(u: &VectorField, params: &PhysParams, grid: &WireGrid) -> VectorField {
    check(u, grid);
    let lap = grid::discrete_laplacian(u, grid);
    VectorField::new((0..grid.n()).map(|k| llg_node(u[k], lap[k], params.alpha)).collect())
}

/// Nodewise `G₁`, `G₂`, `G₃` and the `κκ'` factor of `Sʰ`.
pub fn strat_parts(u: &VectorField, params: &PhysParams, grid: &WireGrid) -> Vec<StratParts> {
    check(u, grid);
    let st = Stencil::new(u, grid);
    (0..grid.n())
        .map(|k| strat_parts_node(u[k], st.du[k], st.du_back[k], st.lap[k], params.gamma))
        .collect()
}

/// `Sʰ(u)`; `(κ²)⁻` is the backward shift under the grid closure.
pub fn strat_correction_s(u: &VectorField, noise: &NoiseModel, params: &PhysParams, grid: &WireGrid) -> VectorField {
    check(u, grid);
    assert_eq!(noise.grid().n(), grid.n(), "noise built on a different grid");
    let k2 = noise.kappa_sq();
    let k2_back = grid::shift_scalar(k2, grid, Direction::Backward);
    let kkp = noise.kappa_kappa_prime();
    let parts = strat_parts(u, params, grid);
    VectorField::new(
        parts.iter().enumerate().map(|(k, p)| s_node(p, k2[k], k2_back[k], kkp[k])).collect(),
    )
}

/// Itô drift `Fʰ + ½Sʰ`.
pub fn full_drift(
    u: &VectorField,
    v_now: &ScalarField,
    noise: &NoiseModel,
    params: &PhysParams,
    grid: &WireGrid,
) -> VectorField {
    ito_coefficients(u, v_now, noise, params, grid).drift
}

/// Drift and diffusion of the Itô form, sharing one stencil evaluation.
#[derive(Debug, Clone)]
pub struct ItoCoefficients {
    pub drift: VectorField,
    pub diffusion: VectorField,
    pub stencil: Stencil,
}

pub fn ito_coefficients(
    u: &VectorField,
    v_now: &ScalarField,
    noise: &NoiseModel,
    params: &PhysParams,
    grid: &WireGrid,
) -> ItoCoefficients {
    check(u, grid);
    assert_eq!(v_now.len(), grid.n());
    let st = Stencil::new(u, grid);
    let n = grid.n();
    let mut drift = Vec::with_capacity(n);
    let mut diffusion = Vec::with_capacity(n);
    let noisy = !noise.is_deterministic();
    let k2 = noise.kappa_sq();
    let kkp = noise.kappa_kappa_prime();
    for k in 0..n {
        let f = f_node(u[k], st.du[k], st.lap[k], v_now[k], params);
        let d = if noisy {
            let parts = strat_parts_node(u[k], st.du[k], st.du_back[k], st.lap[k], params.gamma);
            let k2_back = k2[grid.neighbor(k, -1)];
            vec3::axpy(f, 0.5, s_node(&parts, k2[k], k2_back, kkp[k]))
        } else {
            f
        };
        drift.push(d);
        diffusion.push(g_node(u[k], st.du[k], params.gamma));
    }
    ItoCoefficients { drift: VectorField::new(drift), diffusion: VectorField::new(diffusion), stencil: st }
}

/// Stratonovich drift `a(u) = −u×(Δʰu + α u×Δʰu) + v Gʰ(u)` and diffusion
/// `b(u) = Gʰ(u)`.
pub fn stratonovich_coefficients(
    u: &VectorField,
    v_now: &ScalarField,
    params: &PhysParams,
    grid: &WireGrid,
) -> (VectorField, VectorField) {
    check(u, grid);
    let st = Stencil::new(u, grid);
    let n = grid.n();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        let g = g_node(u[k], st.du[k], params.gamma);
        a.push(vec3::axpy(llg_node(u[k], st.lap[k], params.alpha), v_now[k], g));
        b.push(g);
    }
    (VectorField::new(a), VectorField::new(b))
}

/// Continuum coefficients evaluated pointwise from `m`, `Dm`, `D²m`.
pub mod continuous {
    use super::*;

    /// Pointwise coefficient data at one location.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Jet {
        pub m: Vec3,
        pub dm: Vec3,
        pub d2m: Vec3,
        pub v: f64,
        pub kappa_sq: f64,
        pub kappa_kappa_prime: f64,
    }

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Terms {
        pub f: Vec3,
        pub s: Vec3,
        pub g: Vec3,
    }

    /// `G(m) = m×(m×Dm) + γ m×Dm`
    pub fn g(j: &Jet, p: &PhysParams) -> Vec3 {
        g_node(j.m, j.dm, p.gamma)
    }

    /// Expanded `𝒢(m) = G'(m)G(m)`.
    pub fn g_prime_g(j: &Jet, p: &PhysParams) -> Vec3 {
        let (m, dm, d2m, gm) = (j.m, j.dm, j.d2m, p.gamma);
        let m2 = vec3::norm_sq(m);
        let mxd2 = cross(m, d2m);
        let mxd = cross(m, dm);
        let mut out = vec3::scale(gm * gm - m2, cross(m, mxd2));
        out = vec3::axpy(out, -2.0 * gm * m2, mxd2);
        out = vec3::axpy(out, -gm * gm, cross(dm, mxd));
        out = vec3::axpy(out, -vec3::norm_sq(mxd), m);
        vec3::axpy(out, gm * dot(m, dm), mxd)
    }

    /// General forms of `F`, `S`, `G`, valid off the sphere.
    pub fn general(j: &Jet, p: &PhysParams) -> Terms {
        let g = g(j, p);
        let f = vec3::add(g_node(j.m, vec3::scale(j.v, j.dm), p.gamma), llg_node(j.m, j.d2m, p.alpha));
        let mxg = cross(j.m, g);
        let transport = vec3::axpy(cross(j.m, mxg), p.gamma, mxg);
        let s = vec3::axpy(vec3::scale(j.kappa_sq, g_prime_g(j, p)), j.kappa_kappa_prime, transport);
        Terms { f, s, g }
    }

    /// On-sphere forms (requires `|m| = 1`, and `⟨m, Dm⟩ = 0` for agreement
    /// with [`general`]):
    ///
    /// ```text
    /// F = −v(Dm − γ m×Dm) − m×D²m + αD²m + α|Dm|²m
    /// S = κ²((1−γ²)D²m − 2γ²|Dm|²m − 2γ m×D²m) + κκ'((1−γ²)Dm − 2γ m×Dm)
    /// G = −Dm + γ m×Dm
    /// ```
    pub fn simplified(j: &Jet, p: &PhysParams) -> Result<Terms> {
        let r = vec3::norm(j.m);
        if (r - 1.0).abs() > 1e-10 {
            return Err(Error::NotOnSphere { node: 0, norm: r });
        }
        let (m, dm, d2m, gm, a) = (j.m, j.dm, j.d2m, p.gamma, p.alpha);
        let mxd = cross(m, dm);
        let mxd2 = cross(m, d2m);
        let dm2 = vec3::norm_sq(dm);
        let mut f = vec3::scale(-j.v, vec3::axpy(dm, -gm, mxd));
        f = vec3::sub(f, mxd2);
        f = vec3::axpy(f, a, d2m);
        f = vec3::axpy(f, a * dm2, m);
        let mut s2 = vec3::scale(1.0 - gm * gm, d2m);
        s2 = vec3::axpy(s2, -2.0 * gm * gm * dm2, m);
        s2 = vec3::axpy(s2, -2.0 * gm, mxd2);
        let s1 = vec3::axpy(vec3::scale(1.0 - gm * gm, dm), -2.0 * gm, mxd);
        let s = vec3::axpy(vec3::scale(j.kappa_sq, s2), j.kappa_kappa_prime, s1);
        let g = vec3::axpy(vec3::scale(-1.0, dm), gm, mxd);
        Ok(Terms { f, s, g })
    }

    /// [`simplified`] over a sampled profile; fails at the first node off the sphere.
    pub fn simplified_field(jets: &[Jet], p: &PhysParams) -> Result<Vec<Terms>> {
        jets.iter()
            .enumerate()
            .map(|(k, j)| {
                simplified(j, p).map_err(|e| match e {
                    Error::NotOnSphere { norm, .. } => Error::NotOnSphere { node: k, norm },
                    e => e,
                })
            })
            .collect()
    }
}
