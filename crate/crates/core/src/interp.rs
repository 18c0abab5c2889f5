//! Piecewise interpolation of grid functions and the remainder operators
//! that relate the two interpolants.
//!
//! On a cell `[x_k, x_{k+1})`, with `s = x − x_k`,
//!
//! ```text
//! û(x) = u(x_k)
//! ū(x) = ½(u(x_k) + u(x_{k−1})) + ∂ʰu⁻(x_k) s + ½ Δʰu(x_k) s²
//! ```
//!
//! `ū` is C¹ across knots and `û = ū − R₀ū` exactly. Integrals over cells
//! use Gauss–Legendre rules, exact for the polynomial integrands involved.

use crate::error::{Error, Result};
use crate::grid::{self, Boundary, VectorField, WireGrid};
use crate::vec3::{self, cross, dot, Vec3};

/// 3-point Gauss–Legendre nodes and weights on `[0, 1]` (exact to degree 5).
pub const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// 5-point Gauss–Legendre nodes and weights on `[0, 1]` (exact to degree 9).
pub const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_44),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// `ū` with per-cell coefficients `a + b s + c s²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuadratic {
    grid: WireGrid,
    a: Vec<Vec3>,
    b: Vec<Vec3>,
    c: Vec<Vec3>,
}

/// `û`, constant on each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    grid: WireGrid,
    values: Vec<Vec3>,
}

/// Value and derivatives of an interpolant at a point, with its cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPoint {
    pub cell: usize,
    /// `x − x_k`
    pub s: f64,
    pub h: f64,
    pub u: Vec3,
    pub du: Vec3,
    pub d2u: Vec3,
}

/// Cell containing `x` and the offset inside it. Points past the right end
/// of a clamped grid fall in the last cell; periodic grids wrap.
pub fn locate(grid: &WireGrid, x: f64) -> (usize, f64) {
    let h = grid.h();
    let cells = grid.cell_count();
    let mut y = x - grid.origin();
    if grid.boundary() == Boundary::Periodic {
        y = y.rem_euclid(grid.extent());
    }
    let k = ((y / h).floor().max(0.0) as usize).min(cells - 1);
    (k, y - k as f64 * h)
}

pub fn quad_interp(u: &VectorField, grid: &WireGrid) -> PiecewiseQuadratic {
    assert_eq!(u.len(), grid.n(), "field length does not match grid");
    let back = grid::backward_diff(u, grid);
    let lap = grid::discrete_laplacian(u, grid);
    let cells = grid.cell_count();
    let mut a = Vec::with_capacity(cells);
    let mut b = Vec::with_capacity(cells);
    let mut c = Vec::with_capacity(cells);
    for k in 0..cells {
        let um = u[grid.neighbor(k, -1)];
        a.push(vec3::scale(0.5, vec3::add(u[k], um)));
        b.push(back[k]);
        c.push(vec3::scale(0.5, lap[k]));
    }
    PiecewiseQuadratic { grid: *grid, a, b, c }
}

pub fn const_interp(u: &VectorField, grid: &WireGrid) -> PiecewiseConstant {
    assert_eq!(u.len(), grid.n(), "field length does not match grid");
    PiecewiseConstant { grid: *grid, values: u.values()[..grid.cell_count()].to_vec() }
}

impl PiecewiseConstant {
    pub fn grid(&self) -> &WireGrid {
        &self.grid
    }

    pub fn cell_values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> Vec3 {
        self.values[locate(&self.grid, x).0]
    }
}

impl PiecewiseQuadratic {
    pub fn grid(&self) -> &WireGrid {
        &self.grid
    }

    /// `(a_k, b_k, c_k)` for cell `k`.
    pub fn coefficients(&self, k: usize) -> (Vec3, Vec3, Vec3) {
        (self.a[k], self.b[k], self.c[k])
    }

    pub fn cell_count(&self) -> usize {
        self.a.len()
    }

    /// Evaluate inside cell `k` at offset `s`; `s = h` gives the left limit
    /// at `x_{k+1}`.
    pub fn at_cell(&self, k: usize, s: f64) -> CellPoint {
        let (a, b, c) = (self.a[k], self.b[k], self.c[k]);
        CellPoint {
            cell: k,
            s,
            h: self.grid.h(),
            u: vec3::axpy(vec3::axpy(a, s, b), s * s, c),
            du: vec3::axpy(b, 2.0 * s, c),
            d2u: vec3::scale(2.0, c),
        }
    }

    pub fn at(&self, x: f64) -> CellPoint {
        let (k, s) = locate(&self.grid, x);
        self.at_cell(k, s)
    }

    pub fn eval(&self, x: f64) -> Vec3 {
        self.at(x).u
    }

    pub fn deriv(&self, x: f64) -> Vec3 {
        self.at(x).du
    }

    pub fn second_deriv(&self, x: f64) -> Vec3 {
        self.at(x).d2u
    }

    /// Largest value and first-derivative jumps over the interior knots
    /// (all knots for periodic grids).
    pub fn knot_jumps(&self) -> (f64, f64) {
        let cells = self.cell_count();
        let h = self.grid.h();
        let pairs = match self.grid.boundary() {
            Boundary::Periodic => cells,
            Boundary::Clamped => cells - 1,
        };
        let (mut jv, mut jd) = (0.0_f64, 0.0_f64);
        for k in 0..pairs {
            let left = self.at_cell(k, h);
            let right = self.at_cell((k + 1) % cells, 0.0);
            jv = jv.max(vec3::norm(vec3::sub(left.u, right.u)));
            jd = jd.max(vec3::norm(vec3::sub(left.du, right.du)));
        }
        (jv, jd)
    }

    /// Composite quadrature points `(x, weight, point)` with `refine`
    /// sub-cells per cell and `rule` on each.
    pub fn quadrature(&self, refine: usize, rule: &[(f64, f64)]) -> Vec<(f64, f64, CellPoint)> {
        let h = self.grid.h();
        let sub = h / refine as f64;
        let mut out = Vec::with_capacity(self.cell_count() * refine * rule.len());
        for k in 0..self.cell_count() {
            for r in 0..refine {
                for &(node, w) in rule {
                    let s = (r as f64 + node) * sub;
                    out.push((self.grid.x(k) + s, w * sub, self.at_cell(k, s)));
                }
            }
        }
        out
    }
}

/// Norms of `ū` and its derivatives over the represented interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpNorms {
    /// Sampled supremum (cell ends plus 16 interior points per cell).
    pub sup: f64,
    pub l2: f64,
    pub d_l2: f64,
    pub d2_l2: f64,
    pub d_l4: f64,
}

pub fn interp_norms(q: &PiecewiseQuadratic) -> InterpNorms {
    let (mut l2, mut d, mut d2, mut d4) = (0.0, 0.0, 0.0, 0.0);
    for (_, w, p) in q.quadrature(1, &GAUSS3) {
        l2 += w * vec3::norm_sq(p.u);
        let g = vec3::norm_sq(p.du);
        d += w * g;
        d2 += w * vec3::norm_sq(p.d2u);
        // |Dū|⁴ has degree 4 per cell
        d4 += w * g * g;
    }
    let h = q.grid.h();
    let mut sup = 0.0_f64;
    for k in 0..q.cell_count() {
        for i in 0..=16 {
            sup = sup.max(vec3::norm(q.at_cell(k, h * i as f64 / 16.0).u));
        }
    }
    InterpNorms { sup, l2: l2.sqrt(), d_l2: d.sqrt(), d2_l2: d2.sqrt(), d_l4: d4.powf(0.25) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Remainder {
    R0,
    R1,
    P1,
    P2,
    P3,
    P4,
    P5,
    Q1,
    Q2,
}

impl Remainder {
    pub const ALL: [Remainder; 9] = [
        Remainder::R0,
        Remainder::R1,
        Remainder::P1,
        Remainder::P2,
        Remainder::P3,
        Remainder::P4,
        Remainder::P5,
        Remainder::Q1,
        Remainder::Q2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Remainder::R0 => "R0",
            Remainder::R1 => "R1",
            Remainder::P1 => "P1",
            Remainder::P2 => "P2",
            Remainder::P3 => "P3",
            Remainder::P4 => "P4",
            Remainder::P5 => "P5",
            Remainder::Q1 => "Q1",
            Remainder::Q2 => "Q2",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// All nine remainders at one point, in [`Remainder::ALL`] order.
pub fn remainders_at(p: &CellPoint) -> [Vec3; 9] {
    let (u, du, d2u, s, h) = (p.u, p.du, p.d2u, p.s, p.h);
    let d2s = vec3::scale(s, d2u);
    let r0 = vec3::add(vec3::scale(s - 0.5 * h, vec3::sub(du, d2s)), vec3::scale(0.5 * s * s, d2u));
    let r1 = vec3::scale(s - h, d2u);
    let u_r0 = vec3::sub(u, r0);
    let uxdu = cross(u, du);
    let p1 = vec3::add(cross(r0, du), cross(u_r0, r1));
    let p2 = vec3::add(cross(u, p1), cross(r0, vec3::sub(uxdu, p1)));
    let p3 = vec3::add(
        vec3::scale(dot(vec3::sub(vec3::scale(2.0, uxdu), p1), p1), u),
        vec3::scale(vec3::norm_sq(vec3::sub(uxdu, p1)), r0),
    );
    let p4 = vec3::add(cross(r1, uxdu), cross(vec3::sub(du, r1), p1));
    let x = dot(r0, du) + dot(u_r0, d2s);
    let p5 = vec3::add(vec3::scale(x, uxdu), vec3::scale(dot(u_r0, vec3::sub(du, d2s)), p1));
    let q1 = cross(r0, d2u);
    let q2 = vec3::add(cross(u, q1), cross(r0, cross(u_r0, d2u)));
    [r0, r1, p1, p2, p3, p4, p5, q1, q2]
}

/// Remainders of `ū` at composite Gauss points of a refined grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRemainders {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub points: Vec<CellPoint>,
    values: Vec<[Vec3; 9]>,
}

/// Sample on `refine` sub-cells per cell (5 Gauss points each).
pub fn remainders(q: &PiecewiseQuadratic, refine: usize) -> Result<SampledRemainders> {
    if refine < 2 {
        return Err(Error::InvalidConfig(format!("refinement factor must be >= 2, got {refine}")));
    }
    let quad = q.quadrature(refine, &GAUSS5);
    let mut out = SampledRemainders {
        x: Vec::with_capacity(quad.len()),
        weights: Vec::with_capacity(quad.len()),
        points: Vec::with_capacity(quad.len()),
        values: Vec::with_capacity(quad.len()),
    };
    for (x, w, p) in quad {
        out.x.push(x);
        out.weights.push(w);
        out.values.push(remainders_at(&p));
        out.points.push(p);
    }
    Ok(out)
}

impl SampledRemainders {
    pub fn values(&self, kind: Remainder) -> impl Iterator<Item = Vec3> + '_ {
        let i = kind.index();
        self.values.iter().map(move |v| v[i])
    }

    pub fn l2_norm(&self, kind: Remainder) -> f64 {
        self.values(kind).zip(&self.weights).map(|(v, w)| w * vec3::norm_sq(v)).sum::<f64>().sqrt()
    }

    /// `∫ ⟨f ū, φ⟩ dx`
    pub fn pairing(&self, kind: Remainder, phi: impl Fn(f64) -> Vec3) -> f64 {
        self.values(kind).zip(&self.weights).zip(&self.x).map(|((v, w), &x)| w * dot(v, phi(x))).sum()
    }
}

/// Smooth compactly supported `φ(x) = ψ((x − c)/r) d` with the standard bump
/// `ψ(y) = exp(−1/(1 − y²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub center: f64,
    pub radius: f64,
    pub direction: Vec3,
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> Vec3 {
        let y = (x - self.center) / self.radius;
        if y.abs() >= 1.0 {
            return [0.0; 3];
        }
        vec3::scale((-1.0 / (1.0 - y * y)).exp(), self.direction)
    }
}

/// Five fixed test functions supported in `[-4, 4]`.
pub fn standard_test_functions() -> [TestFunction; 5] {
    let d = 1.0 / 3f64.sqrt();
    [
        TestFunction { center: 0.0, radius: 4.0, direction: [1.0, 0.0, 0.0] },
        TestFunction { center: 0.0, radius: 4.0, direction: [0.0, 1.0, 0.0] },
        TestFunction { center: 0.0, radius: 4.0, direction: [0.0, 0.0, 1.0] },
        TestFunction { center: -1.0, radius: 3.0, direction: [d, d, d] },
        TestFunction { center: 1.0, radius: 3.0, direction: [d, -d, d] },
    ]
}

/// `∫ (|ū| − 1)² dx` with `refine` sub-cells per cell.
pub fn sphere_deviation_integral(q: &PiecewiseQuadratic, refine: usize) -> f64 {
    q.quadrature(refine.max(1), &GAUSS5).iter().map(|(_, w, p)| w * (vec3::norm(p.u) - 1.0).powi(2)).sum()
}

/// `∫ (|ū| − 1)²` for every stored state of a trajectory.
pub fn sphere_recovery(traj: &crate::integrator::Trajectory) -> Vec<f64> {
    traj.states.iter().map(|m| sphere_deviation_integral(&quad_interp(m, &traj.grid), 4)).collect()
}

/// Left-endpoint time integral of [`sphere_recovery`].
pub fn sphere_recovery_integral(traj: &crate::integrator::Trajectory) -> f64 {
    let dev = sphere_recovery(traj);
    traj.times.windows(2).zip(&dev).map(|(t, d)| (t[1] - t[0]) * d).sum()
}

/// Weighted `L²_w` and `H¹_w` distances between two interpolants, integrated
/// over the cells of the finer one.
pub fn weighted_distance(a: &PiecewiseQuadratic, b: &PiecewiseQuadratic, w: f64) -> (f64, f64) {
    let (fine, coarse) = if a.grid.h() <= b.grid.h() { (a, b) } else { (b, a) };
    let ratio = coarse.grid.h() / fine.grid.h();
    let r = ratio.round() as usize;
    let nested = r >= 1 && (ratio - r as f64).abs() < 1e-9 && fine.grid.origin() == coarse.grid.origin();
    let (mut l2, mut d) = (0.0, 0.0);
    for (x, wt, p) in fine.quadrature(1, &GAUSS5) {
        let o = if nested {
            // exact cell mapping avoids re-rounding x
            let k = (p.cell / r).min(coarse.cell_count() - 1);
            coarse.at_cell(k, (p.cell - k * r) as f64 * fine.grid.h() + p.s)
        } else {
            coarse.at(x)
        };
        let r = grid::rho(w, x) * wt;
        l2 += r * vec3::norm_sq(vec3::sub(p.u, o.u));
        d += r * vec3::norm_sq(vec3::sub(p.du, o.du));
    }
    (l2.sqrt(), (l2 + d).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, random_unit_field, stream_rng};

    fn periodic(n: usize, h: f64) -> WireGrid {
        WireGrid::new(h, n, 0.0, Boundary::Periodic).unwrap()
    }

    #[test]
    fn gauss_rules_integrate_monomials() {
        for d in 0..=9 {
            let exact = 1.0 / (d as f64 + 1.0);
            let g5: f64 = GAUSS5.iter().map(|(x, w)| w * x.powi(d)).sum();
            assert!((g5 - exact).abs() < 1e-15, "degree {d}");
            if d <= 5 {
                let g3: f64 = GAUSS3.iter().map(|(x, w)| w * x.powi(d)).sum();
                assert!((g3 - exact).abs() < 1e-15, "degree {d}");
            }
        }
    }

    #[test]
    fn knot_values_and_constants() {
        let g = periodic(16, 0.3);
        let u = random_field(&mut stream_rng(1, 0), 16);
        let q = quad_interp(&u, &g);
        for k in 0..16 {
            let expect = vec3::scale(0.5, vec3::add(u[k], u[(k + 15) % 16]));
            assert_eq!(q.at_cell(k, 0.0).u, expect);
        }
        let c = VectorField::constant(16, [0.3, -1.0, 2.0]);
        let qc = quad_interp(&c, &g);
        for x in [0.0, 0.17, 2.9, 4.7] {
            assert_eq!(qc.eval(x), [0.3, -1.0, 2.0]);
            assert_eq!(qc.deriv(x), [0.0; 3]);
        }
        let n = interp_norms(&qc);
        assert_eq!(n.d2_l2, 0.0);
    }

    #[test]
    fn c1_across_knots() {
        let g = periodic(32, 0.2);
        let u = random_field(&mut stream_rng(2, 0), 32);
        let (jv, jd) = quad_interp(&u, &g).knot_jumps();
        assert!(jv <= 1e-12 && jd <= 1e-12, "{jv} {jd}");
    }

    #[test]
    fn norm_relations() {
        let g = periodic(64, 0.1);
        let mut rng = stream_rng(3, 0);
        for _ in 0..10 {
            let u = random_field(&mut rng, 64);
            let n = interp_norms(&quad_interp(&u, &g));
            let lap = grid::l2_norm_sq(&grid::discrete_laplacian(&u, &g), &g).sqrt();
            assert!((n.d2_l2 - lap).abs() <= 1e-12 * lap);
            let v = random_unit_field(&mut rng, 64);
            let n = interp_norms(&quad_interp(&v, &g));
            let d = grid::l2_norm_sq(&grid::forward_diff(&v, &g), &g).sqrt();
            assert!(n.d_l2 < 3.0 * d);
            assert!(n.sup <= 5.0);
        }
    }

    #[test]
    fn reconstruction_and_identities() {
        let g = periodic(32, 0.25);
        let u = random_unit_field(&mut stream_rng(4, 0), 32);
        let q = quad_interp(&u, &g);
        let r = remainders(&q, 3).unwrap();
        let du = grid::forward_diff(&u, &g);
        let dback = grid::backward_diff(&u, &g);
        let lap = grid::discrete_laplacian(&u, &g);
        for (i, p) in r.points.iter().enumerate() {
            let k = p.cell;
            let rem = r.values[i];
            let (uh, duh, dbh, lh) = (u[k], du[k], dback[k], lap[k]);
            let scale = 1.0 + vec3::norm(p.du).powi(3) + vec3::norm(p.d2u).powi(2);
            let close = |a: Vec3, b: Vec3| vec3::norm(vec3::sub(a, b)) <= 1e-12 * scale;
            assert!(close(vec3::sub(p.u, rem[0]), uh));
            assert!(close(vec3::sub(p.du, rem[1]), duh));
            let uxd = cross(p.u, p.du);
            assert!(close(vec3::sub(uxd, rem[2]), cross(uh, duh)));
            assert!(close(vec3::sub(cross(p.u, uxd), rem[3]), cross(uh, cross(uh, duh))));
            let lhs3 = vec3::scale(vec3::norm_sq(cross(uh, duh)), uh);
            assert!(close(vec3::sub(vec3::scale(vec3::norm_sq(uxd), p.u), rem[4]), lhs3));
            assert!(close(vec3::sub(cross(p.du, uxd), rem[5]), cross(duh, cross(uh, duh))));
            let lhs5 = vec3::scale(dot(uh, dbh), cross(uh, duh));
            assert!(close(vec3::sub(vec3::scale(dot(p.u, p.du), uxd), rem[6]), lhs5));
            assert!(close(vec3::sub(cross(p.u, p.d2u), rem[7]), cross(uh, lh)));
            let lhs9 = cross(uh, cross(uh, lh));
            assert!(close(vec3::sub(cross(p.u, cross(p.u, p.d2u)), rem[8]), lhs9));
        }
        assert!(remainders(&q, 1).is_err());
    }

    #[test]
    fn constant_field_has_no_remainders() {
        let g = periodic(8, 0.5);
        let q = quad_interp(&VectorField::constant(8, [0.0, 1.0, 0.0]), &g);
        let r = remainders(&q, 2).unwrap();
        for kind in Remainder::ALL {
            assert_eq!(r.l2_norm(kind), 0.0, "{}", kind.name());
        }
        assert_eq!(sphere_deviation_integral(&q, 2), 0.0);
    }

    #[test]
    fn sphere_recovery_bound_on_random_slice() {
        let g = periodic(64, 0.1);
        let mut rng = stream_rng(6, 0);
        for _ in 0..20 {
            let u = random_unit_field(&mut rng, 64);
            let dev = sphere_deviation_integral(&quad_interp(&u, &g), 8);
            let d2 = grid::l2_norm_sq(&grid::forward_diff(&u, &g), &g);
            assert!(dev <= 2.0 / 3.0 * g.h().powi(2) * d2 * 1.1, "{dev} vs {d2}");
        }
    }

    #[test]
    fn distances() {
        let g = WireGrid::spanning(-2.0, 2.0, 0.1, Boundary::Clamped).unwrap();
        let f = g.with_spacing(0.05).unwrap();
        let uc = VectorField::from_fn(&g, |x| [x.sin(), x.cos(), 0.0]);
        let uf = VectorField::from_fn(&f, |x| [x.sin(), x.cos(), 0.0]);
        let (a, b) = (quad_interp(&uc, &g), quad_interp(&uf, &f));
        assert_eq!(weighted_distance(&a, &a, 1.0), (0.0, 0.0));
        let (l1, h1) = weighted_distance(&a, &b, 1.0);
        let (l2, _) = weighted_distance(&a, &b, 2.0);
        assert!(l1 > 0.0 && h1 >= l1 && l2 <= l1);
        let (k, s) = locate(&g, 2.0);
        assert_eq!(k, 39);
        assert!((s - 0.1).abs() < 1e-12);
        let p = WireGrid::new(0.5, 4, 0.0, Boundary::Periodic).unwrap();
        assert_eq!(locate(&p, 2.25), (0, 0.25));
    }
}
