//! Truncated Q-Wiener noise `W(t) = Σ_j q_j W_j(t) f_j` restricted to a grid.
//!
//! Every mode family ships closed-form `f_j`, `f_j'` and `f_j''`, so the
//! derived fields
//!
//! ```text
//! κ²(x)   = Σ_j q_j² f_j(x)²
//! κκ'(x)  = Σ_j q_j² f_j(x) f_j'(x)
//! C_κ²    = max_x Σ_j q_j² (f_j² + f_j'² + f_j''²)(x)
//! ```
//!
//! are exact sums at the nodes. `C_κ` is a maximum over grid nodes, i.e. a
//! lower bound for the supremum over the line.
//!
//! Increments are drawn as one standard normal per mode, in mode order. The
//! same normals can be pushed through noise models built on different grids,
//! which is how coupled h-refinement runs share one Brownian path.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, WireGrid};
use crate::random::standard_normal;

/// Default Burkholder–Davis–Gundy constant for `p = 1` in feasibility reports.
pub const DEFAULT_BDG_CONSTANT: f64 = 4.0;

/// Upper bound on the number of retained modes.
pub const MAX_MODES: usize = 100_000;

/// Spatial profiles `f_j`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeFamily {
    /// `f_j(x) = exp(−(x − c_j)² / (2 s²))` with centres
    /// `c_j = center + (j − (J−1)/2) spacing`.
    GaussianBumps { width: f64, spacing: f64, center: f64 },
    /// `f_j(x) = exp(−x² / (2 S²)) · t_j(x)` with `t_0 = 1`,
    /// `t_{2k−1} = sin(kωx)`, `t_{2k} = cos(kωx)`.
    EnvelopedFourier { envelope: f64, omega: f64 },
    /// `f_j ≡ value`. Not square integrable on the line; useful on bounded
    /// grids and for checks.
    Uniform { value: f64 },
}

/// Amplitude law `j ↦ q_j` for `j = 0, 1, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeLaw {
    Constant { sigma: f64 },
    /// `q_j = σ r^j`
    Geometric { sigma: f64, ratio: f64 },
    /// `q_j = σ (j + 1)^(−a)`
    Power { sigma: f64, exponent: f64 },
}

impl AmplitudeLaw {
    pub fn amplitude(&self, j: usize) -> f64 {
        match *self {
            AmplitudeLaw::Constant { sigma } => sigma,
            AmplitudeLaw::Geometric { sigma, ratio } => sigma * ratio.powi(j as i32),
            AmplitudeLaw::Power { sigma, exponent } => sigma * ((j + 1) as f64).powf(-exponent),
        }
    }

    fn sigma(&self) -> f64 {
        match *self {
            AmplitudeLaw::Constant { sigma }
            | AmplitudeLaw::Geometric { sigma, .. }
            | AmplitudeLaw::Power { sigma, .. } => sigma,
        }
    }
}

/// Mode family, count and amplitudes; grid independent.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub family: ModeFamily,
    pub modes: usize,
    pub scale: AmplitudeLaw,
}

impl NoiseSpec {
    /// No noise (`J = 0`).
    pub fn none() -> Self {
        Self { family: ModeFamily::Uniform { value: 0.0 }, modes: 0, scale: AmplitudeLaw::Constant { sigma: 0.0 } }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes > MAX_MODES {
            return Err(Error::InvalidNoise(format!("J = {} exceeds the limit {MAX_MODES}", self.modes)));
        }
        let sigma = self.scale.sigma();
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidNoise(format!("amplitude sigma must be finite and >= 0, got {sigma}")));
        }
        match self.scale {
            AmplitudeLaw::Geometric { ratio, .. } if !(ratio.is_finite() && ratio >= 0.0) => {
                return Err(Error::InvalidNoise(format!("geometric ratio must be finite and >= 0, got {ratio}")));
            }
            AmplitudeLaw::Power { exponent, .. } if !exponent.is_finite() => {
                return Err(Error::InvalidNoise("power exponent must be finite".into()));
            }
            _ => {}
        }
        let total: f64 = (0..self.modes).map(|j| self.scale.amplitude(j).powi(2)).sum();
        if !total.is_finite() {
            return Err(Error::InvalidNoise(format!(
                "sum of squared amplitudes diverges for J = {}",
                self.modes
            )));
        }
        match self.family {
            ModeFamily::GaussianBumps { width, spacing, center } => {
                if !(width.is_finite() && width > 0.0) || !spacing.is_finite() || !center.is_finite() {
                    return Err(Error::InvalidNoise("gaussian bumps need width > 0 and finite spacing/center".into()));
                }
            }
            ModeFamily::EnvelopedFourier { envelope, omega } => {
                if !(envelope.is_finite() && envelope > 0.0) || !omega.is_finite() {
                    return Err(Error::InvalidNoise("fourier modes need envelope > 0 and finite omega".into()));
                }
            }
            ModeFamily::Uniform { value } => {
                if !value.is_finite() {
                    return Err(Error::InvalidNoise("uniform mode value must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// `(f_j, f_j', f_j'')` at `x`.
    pub fn profile(&self, j: usize, x: f64) -> (f64, f64, f64) {
        match self.family {
            ModeFamily::GaussianBumps { width, spacing, center } => {
                let c = center + (j as f64 - (self.modes as f64 - 1.0) / 2.0) * spacing;
                let s2 = width * width;
                let y = x - c;
                let f = (-y * y / (2.0 * s2)).exp();
                (f, -y / s2 * f, (y * y / (s2 * s2) - 1.0 / s2) * f)
            }
            ModeFamily::EnvelopedFourier { envelope, omega } => {
                let s2 = envelope * envelope;
                let e = (-x * x / (2.0 * s2)).exp();
                let e1 = -x / s2 * e;
                let e2 = (x * x / (s2 * s2) - 1.0 / s2) * e;
                let (t, t1, t2) = if j == 0 {
                    (1.0, 0.0, 0.0)
                } else {
                    let k = j.div_ceil(2) as f64;
                    let w = k * omega;
                    let (s, c) = (w * x).sin_cos();
                    if j % 2 == 1 {
                        (s, w * c, -w * w * s)
                    } else {
                        (c, -w * s, -w * w * c)
                    }
                };
                (e * t, e1 * t + e * t1, e2 * t + 2.0 * e1 * t1 + e * t2)
            }
            ModeFamily::Uniform { value } => (value, 0.0, 0.0),
        }
    }
}

/// One mode `(q_j, f_j)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMode {
    pub q: f64,
    pub f: ScalarField,
    pub f_prime: ScalarField,
    pub f_double_prime: ScalarField,
}

/// Noise restricted to a grid together with its derived coefficient fields.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    grid: WireGrid,
    modes: Vec<NoiseMode>,
    kappa_sq: ScalarField,
    kappa_kappa_prime: ScalarField,
    c_kappa: f64,
    q_total_sq: f64,
}

/// Sample the modes of `spec` on `grid` and assemble `κ²`, `κκ'` and `C_κ`.
pub fn build_noise(spec: &NoiseSpec, grid: &WireGrid) -> Result<NoiseModel> {
    spec.validate()?;
    let n = grid.n();
    let mut modes = Vec::with_capacity(spec.modes);
    for j in 0..spec.modes {
        let mut f = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b, c) = spec.profile(j, grid.x(k));
            f.push(a);
            f1.push(b);
            f2.push(c);
        }
        let mode = NoiseMode {
            q: spec.scale.amplitude(j),
            f: ScalarField::new(f),
            f_prime: ScalarField::new(f1),
            f_double_prime: ScalarField::new(f2),
        };
        let finite = [&mode.f, &mode.f_prime, &mode.f_double_prime]
            .iter()
            .all(|s| s.values().iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidNoise(format!("mode {j} is not finite on the grid")));
        }
        modes.push(mode);
    }
    Ok(NoiseModel::from_modes(*grid, modes))
}

impl NoiseModel {
    /// Deterministic model: `κ² ≡ 0`.
    pub fn zero(grid: &WireGrid) -> Self {
        Self::from_modes(*grid, Vec::new())
    }

    pub fn from_modes(grid: WireGrid, modes: Vec<NoiseMode>) -> Self {
        let n = grid.n();
        let mut kappa_sq = vec![0.0; n];
        let mut kkp = vec![0.0; n];
        let mut bound = vec![0.0; n];
        for m in &modes {
            let q2 = m.q * m.q;
            for k in 0..n {
                let (f, f1, f2) = (m.f[k], m.f_prime[k], m.f_double_prime[k]);
                kappa_sq[k] += q2 * f * f;
                kkp[k] += q2 * f * f1;
                bound[k] += q2 * (f * f + f1 * f1 + f2 * f2);
            }
        }
        let c_kappa = bound.iter().cloned().fold(0.0, f64::max).sqrt();
        let q_total_sq = modes.iter().map(|m| m.q * m.q).sum();
        Self {
            grid,
            modes,
            kappa_sq: ScalarField::new(kappa_sq),
            kappa_kappa_prime: ScalarField::new(kkp),
            c_kappa,
            q_total_sq,
        }
    }

    pub fn grid(&self) -> &WireGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[NoiseMode] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn is_deterministic(&self) -> bool {
        self.modes.iter().all(|m| m.q == 0.0)
    }

    pub fn kappa_sq(&self) -> &ScalarField {
        &self.kappa_sq
    }

    pub fn kappa_kappa_prime(&self) -> &ScalarField {
        &self.kappa_kappa_prime
    }

    pub fn c_kappa(&self) -> f64 {
        self.c_kappa
    }

    pub fn q_total_sq(&self) -> f64 {
        self.q_total_sq
    }

    /// One standard normal per mode, drawn in mode order.
    pub fn draw_mode_normals<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.modes.len()).map(|_| standard_normal(rng)).collect()
    }

    /// `ΔW(x) = Σ_j q_j ξ_j √dt f_j(x)` for given mode normals `ξ`.
    pub fn increment_from_normals(&self, xi: &[f64], dt: f64) -> ScalarField {
        assert_eq!(xi.len(), self.modes.len(), "one normal per mode required");
        let sdt = dt.sqrt();
        let mut out = vec![0.0; self.grid.n()];
        for (m, &z) in self.modes.iter().zip(xi) {
            let a = m.q * z * sdt;
            if a == 0.0 {
                continue;
            }
            for (o, &f) in out.iter_mut().zip(m.f.values()) {
                *o += a * f;
            }
        }
        ScalarField::new(out)
    }

    /// Fresh increment over a step of length `dt`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> ScalarField {
        let xi = self.draw_mode_normals(rng);
        self.increment_from_normals(&xi, dt)
    }
}

/// Feasibility of the noise-smallness conditions for the uniform estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessReport {
    pub p: f64,
    pub c_kappa: f64,
    /// `N_{1,p} = 1 − 4^{p−1} b_p (1+|γ|)^p C_κ^p`
    pub n1: f64,
    /// `N_{2,p} = 2^p (α − (1+2γ²) C_κ² − δ)^p − 4^{p−1} b_p (1+|γ|)^p C_κ^p`
    pub n2: f64,
    pub n1_positive: bool,
    pub n2_positive: bool,
    /// Sufficient ceiling on `C_κ` for both conditions.
    pub c_kappa_ceiling: f64,
    pub below_ceiling: bool,
}

impl SmallnessReport {
    pub fn satisfied(&self) -> bool {
        self.n1_positive && self.n2_positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessInputs {
    pub alpha: f64,
    pub gamma: f64,
    pub p: f64,
    pub delta: f64,
    pub b_p: f64,
}

/// `N_{1,p}`, `N_{2,p}` for a given `C_κ`.
pub fn smallness_constants(c_kappa: f64, s: &SmallnessInputs) -> (f64, f64) {
    let noise = 4f64.powf(s.p - 1.0) * s.b_p * (1.0 + s.gamma.abs()).powf(s.p) * c_kappa.powf(s.p);
    let base = s.alpha - (1.0 + 2.0 * s.gamma * s.gamma) * c_kappa * c_kappa - s.delta;
    // a negative base has no real p-th power for fractional p; the condition fails then
    let damped = if base > 0.0 { 2f64.powf(s.p) * base.powf(s.p) } else { f64::NEG_INFINITY };
    (1.0 - noise, damped - noise)
}

/// Sufficient ceiling on `C_κ`:
/// `min{ (α−δ) / (1 + 2γ² + 2^{1−2/p} b_p^{1/p} (1+|γ|)),  1 / (4 b_p^{1/p} (1+|γ|)),  1 − δ }`.
pub fn smallness_ceiling(s: &SmallnessInputs) -> f64 {
    let g = 1.0 + s.gamma.abs();
    let bp = s.b_p.powf(1.0 / s.p);
    let first = (s.alpha - s.delta) / (1.0 + 2.0 * s.gamma * s.gamma + 2f64.powf(1.0 - 2.0 / s.p) * bp * g);
    let second = 1.0 / (4.0 * bp * g);
    first.min(second).min(1.0 - s.delta)
}

/// Evaluate the smallness conditions for `noise` with damping `alpha`.
pub fn check_smallness(noise: &NoiseModel, inputs: &SmallnessInputs) -> Result<SmallnessReport> {
    let s = inputs;
    if !(s.p >= 1.0 && s.delta > 0.0 && s.b_p > 0.0 && s.alpha > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "smallness check needs p >= 1, delta > 0, b_p > 0, alpha > 0 (got p={}, delta={}, b_p={}, alpha={})",
            s.p, s.delta, s.b_p, s.alpha
        )));
    }
    let c = noise.c_kappa();
    let (n1, n2) = smallness_constants(c, s);
    let ceiling = smallness_ceiling(s);
    Ok(SmallnessReport {
        p: s.p,
        c_kappa: c,
        n1,
        n2,
        n1_positive: n1 > 0.0,
        n2_positive: n2 > 0.0,
        c_kappa_ceiling: ceiling,
        below_ceiling: c <= ceiling,
    })
}
