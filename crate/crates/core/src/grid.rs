//! Truncated uniform lattice, shift and difference operators, discrete norms.
//!
//! A [`WireGrid`] stands in for the infinite lattice `hℤ`: it keeps `n`
//! nodes `origin + k h` and a [`Boundary`] closure that decides what a
//! neighbour read outside `0..n` returns.
//!
//! Operators follow the usual forward-difference conventions:
//!
//! ```text
//! ∂ʰu  = (u⁺ − u) / h
//! Δʰu  = (∂ʰu − ∂ʰu⁻) / h = (u⁺ − 2u + u⁻) / h²
//! ```
//!
//! and norms carry the lattice measure `h`: `|u|_p^p = h Σ |u(x)|^p`.
//!
//! Length mismatches between a field and its grid are contract violations
//! and panic.

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Closure used for neighbour reads outside the stored nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Indices wrap modulo `n`.
    Periodic,
    /// Constant extension: reads past either end return the end value.
    #[default]
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireGrid {
    h: f64,
    n: usize,
    origin: f64,
    boundary: Boundary,
}

impl WireGrid {
    pub fn new(h: f64, n: usize, origin: f64, boundary: Boundary) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing h must be positive, got {h}")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { h, n, origin, boundary })
    }

    /// Grid of spacing `h` covering `[left, right]` (clamped) or the period
    /// `[left, right)` (periodic).
    pub fn spanning(left: f64, right: f64, h: f64, boundary: Boundary) -> Result<Self> {
        let cells = ((right - left) / h).round();
        if !(cells.is_finite() && cells >= 1.0) {
            return Err(Error::InvalidGrid(format!("cannot span [{left}, {right}] with h = {h}")));
        }
        let cells = cells as usize;
        let n = match boundary {
            Boundary::Periodic => cells,
            Boundary::Clamped => cells + 1,
        };
        Self::new(h, n, left, boundary)
    }

    /// Same extent and closure at a new spacing.
    pub fn with_spacing(&self, h: f64) -> Result<Self> {
        Self::spanning(self.origin, self.origin + self.extent(), h, self.boundary)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Length of the represented interval: the period for periodic grids,
    /// `(n - 1) h` for clamped ones.
    pub fn extent(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.n as f64 * self.h,
            Boundary::Clamped => (self.n - 1) as f64 * self.h,
        }
    }

    /// Number of cells `[x_k, x_{k+1})` inside the represented interval.
    pub fn cell_count(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n,
            Boundary::Clamped => self.n - 1,
        }
    }

    pub fn x(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.h
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    /// Index read for node `k + offset` under the boundary closure.
    #[inline]
    pub fn neighbor(&self, k: usize, offset: isize) -> usize {
        let n = self.n as isize;
        let j = k as isize + offset;
        match self.boundary {
            Boundary::Periodic => j.rem_euclid(n) as usize,
            Boundary::Clamped => j.clamp(0, n - 1) as usize,
        }
    }

    #[inline]
    fn check_len(&self, len: usize) {
        assert_eq!(len, self.n, "field length {len} does not match grid size {}", self.n);
    }
}

/// ℝ³-valued grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(Vec<Vec3>);

impl VectorField {
    pub fn new(values: Vec<Vec3>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![vec3::ZERO; n])
    }

    pub fn constant(n: usize, value: Vec3) -> Self {
        Self(vec![value; n])
    }

    pub fn from_fn(grid: &WireGrid, f: impl Fn(f64) -> Vec3) -> Self {
        Self((0..grid.n()).map(|k| f(grid.x(k))).collect())
    }

    pub fn values(&self) -> &[Vec3] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [Vec3] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|&v| vec3::is_finite(v))
    }

    /// Nodewise map.
    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    /// Nodewise combination of two fields of equal length.
    pub fn zip_map(&self, other: &Self, f: impl Fn(Vec3, Vec3) -> Vec3) -> Self {
        assert_eq!(self.len(), other.len(), "field lengths differ");
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, vec3::sub)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, vec3::add)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| vec3::scale(s, v))
    }

    /// Nodewise Euclidean norms.
    pub fn pointwise_norms(&self) -> Vec<f64> {
        self.0.iter().map(|&v| vec3::norm(v)).collect()
    }

    /// `max_x | |u(x)| − 1 |`.
    pub fn sphere_deviation(&self) -> f64 {
        self.0.iter().map(|&v| (vec3::norm(v) - 1.0).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for VectorField {
    type Output = Vec3;
    fn index(&self, k: usize) -> &Vec3 {
        &self.0[k]
    }
}

/// Real-valued grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn from_fn(grid: &WireGrid, f: impl Fn(f64) -> f64) -> Self {
        Self((0..grid.n()).map(|k| f(grid.x(k))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// Samples of `ρ_w(x) = (1 + x²)^(−w)` on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    w: f64,
    values: Vec<f64>,
}

impl WeightProfile {
    pub fn new(w: f64, grid: &WireGrid) -> Result<Self> {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidGrid(format!("weight exponent must be >= 0, got {w}")));
        }
        let values = (0..grid.n()).map(|k| rho(w, grid.x(k))).collect();
        Ok(Self { w, values })
    }

    pub fn exponent(&self) -> f64 {
        self.w
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `ρ_w(x) = (1 + x²)^(−w)`.
#[inline]
pub fn rho(w: f64, x: f64) -> f64 {
    (1.0 + x * x).powf(-w)
}

/// `ρ_w'(x) = −2 w x (1 + x²)^(−w−1)`.
#[inline]
pub fn rho_derivative(w: f64, x: f64) -> f64 {
    -2.0 * w * x * (1.0 + x * x).powf(-w - 1.0)
}

pub(crate) fn shift_values<T: Copy>(values: &[T], grid: &WireGrid, dir: Direction) -> Vec<T> {
    grid.check_len(values.len());
    let off = match dir {
        Direction::Forward => 1,
        Direction::Backward => -1,
    };
    (0..grid.n()).map(|k| values[grid.neighbor(k, off)]).collect()
}

/// `u⁺` or `u⁻` under the grid's closure.
pub fn shift(u: &VectorField, grid: &WireGrid, dir: Direction) -> VectorField {
    VectorField(shift_values(u.values(), grid, dir))
}

pub fn shift_scalar(u: &ScalarField, grid: &WireGrid, dir: Direction) -> ScalarField {
    ScalarField(shift_values(u.values(), grid, dir))
}

/// `∂ʰu = (u⁺ − u) / h`.
pub fn forward_diff(u: &VectorField, grid: &WireGrid) -> VectorField {
    grid.check_len(u.len());
    let inv_h = 1.0 / grid.h();
    let v = u.values();
    VectorField(
        (0..grid.n())
            .map(|k| vec3::scale(inv_h, vec3::sub(v[grid.neighbor(k, 1)], v[k])))
            .collect(),
    )
}

/// `∂ʰu⁻ = (u − u⁻) / h`.
pub fn backward_diff(u: &VectorField, grid: &WireGrid) -> VectorField {
    grid.check_len(u.len());
    let inv_h = 1.0 / grid.h();
    let v = u.values();
    VectorField(
        (0..grid.n())
            .map(|k| vec3::scale(inv_h, vec3::sub(v[k], v[grid.neighbor(k, -1)])))
            .collect(),
    )
}

/// `Δʰu = (u⁺ − 2u + u⁻) / h²`.
pub fn discrete_laplacian(u: &VectorField, grid: &WireGrid) -> VectorField {
    grid.check_len(u.len());
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let v = u.values();
    VectorField(
        (0..grid.n())
            .map(|k| {
                let up = v[grid.neighbor(k, 1)];
                let um = v[grid.neighbor(k, -1)];
                let s = vec3::add(vec3::sub(up, v[k]), vec3::sub(um, v[k]));
                vec3::scale(inv_h2, s)
            })
            .collect(),
    )
}

pub fn forward_diff_scalar(u: &ScalarField, grid: &WireGrid) -> ScalarField {
    grid.check_len(u.len());
    let v = u.values();
    ScalarField((0..grid.n()).map(|k| (v[grid.neighbor(k, 1)] - v[k]) / grid.h()).collect())
}

/// Exponent of an `L_hᵖ` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0 && p.is_finite()) => Err(Error::InvalidExponent(p)),
            e => Ok(e),
        }
    }
}

/// `|u|_{L_hᵖ}`; `p = ∞` is the nodewise maximum without an `h` factor.
pub fn lp_norm(u: &VectorField, grid: &WireGrid, p: Exponent) -> Result<f64> {
    grid.check_len(u.len());
    let norms = u.values().iter().map(|&v| vec3::norm(v));
    Ok(match p.validate()? {
        Exponent::Infinity => norms.fold(0.0, f64::max),
        Exponent::Finite(2.0) => (grid.h() * u.values().iter().map(|&v| vec3::norm_sq(v)).sum::<f64>()).sqrt(),
        Exponent::Finite(p) => (grid.h() * norms.map(|r| r.powf(p)).sum::<f64>()).powf(1.0 / p),
    })
}

/// `|u|²_{L_h²}`.
pub fn l2_norm_sq(u: &VectorField, grid: &WireGrid) -> f64 {
    grid.check_len(u.len());
    grid.h() * u.values().iter().map(|&v| vec3::norm_sq(v)).sum::<f64>()
}

/// `|u|_{H_h¹} = (|u|²_{L_h²} + |∂ʰu|²_{L_h²})^{1/2}`.
pub fn h1_norm(u: &VectorField, grid: &WireGrid) -> f64 {
    (l2_norm_sq(u, grid) + l2_norm_sq(&forward_diff(u, grid), grid)).sqrt()
}

/// `|u|_{E_h} = (|u|²_{L_h^∞} + |∂ʰu|²_{L_h²})^{1/2}`.
pub fn e_norm(u: &VectorField, grid: &WireGrid) -> f64 {
    let sup = u.values().iter().map(|&v| vec3::norm(v)).fold(0.0, f64::max);
    (sup * sup + l2_norm_sq(&forward_diff(u, grid), grid)).sqrt()
}

/// `h Σ ⟨u, v⟩ ρ_w`, unweighted when `weight` is `None`.
pub fn inner(u: &VectorField, v: &VectorField, grid: &WireGrid, weight: Option<&WeightProfile>) -> f64 {
    grid.check_len(u.len());
    grid.check_len(v.len());
    let sum: f64 = match weight {
        None => u.values().iter().zip(v.values()).map(|(&a, &b)| vec3::dot(a, b)).sum(),
        Some(w) => {
            grid.check_len(w.values().len());
            u.values()
                .iter()
                .zip(v.values())
                .zip(w.values())
                .map(|((&a, &b), &r)| vec3::dot(a, b) * r)
                .sum()
        }
    };
    grid.h() * sum
}

/// Discrete energy `½ |∂ʰu|²_{L_h²}`.
pub fn exchange_energy(u: &VectorField, grid: &WireGrid) -> f64 {
    0.5 * l2_norm_sq(&forward_diff(u, grid), grid)
}
