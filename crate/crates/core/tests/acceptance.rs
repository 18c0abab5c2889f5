//! Acceptance criteria. Run with
//! `cargo test -p lls-core --test acceptance -- --nocapture --test-threads=1`
//! to see one PASS/FAIL line per criterion.

use lls_core::diagnostics::{convergence_study, uniform_in_h_study, uniqueness_check};
use lls_core::dynamics::{diffusion_g, drift_f, strat_correction_s, PhysParams};
use lls_core::grid::{self, Boundary, ScalarField, VectorField, WireGrid};
use lls_core::integrator::{simulate, InitialCondition, Scheme, SimConfig};
use lls_core::interp::{
    interp_norms, quad_interp, remainders, sphere_recovery_integral, standard_test_functions, Remainder,
};
use lls_core::noise::{build_noise, check_smallness, AmplitudeLaw, ModeFamily, NoiseSpec};
use lls_core::random::{random_field, random_unit_field, stream_rng};
use lls_core::stats::{loglog_slope, mean_and_se};
use lls_core::vec3::{self, dot};

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!("criterion {id:>2} {} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn bumps(modes: usize, sigma: f64, width: f64) -> NoiseSpec {
    NoiseSpec {
        family: ModeFamily::GaussianBumps { width, spacing: 2.0, center: 0.0 },
        modes,
        scale: AmplitudeLaw::Constant { sigma },
    }
}

/// Domain wall with a localised twist out of the wall plane.
fn twisted_wall(x: f64) -> [f64; 3] {
    let th = 2.0 * (x / 2.0).exp().atan();
    let ph = 0.8 / (0.25 * x).cosh();
    [th.cos(), th.sin() * ph.cos(), th.sin() * ph.sin()]
}

#[test]
fn criterion_01_sphere_orthogonality() {
    let g = WireGrid::new(0.1, 64, -3.2, Boundary::Periodic).unwrap();
    let p = PhysParams::new(0.8, 1.3).unwrap();
    let noise = build_noise(&bumps(3, 0.1, 1.0), &g).unwrap();
    let k2 = noise.kappa_sq();
    let mut rng = stream_rng(101, 0);
    let (mut rf, mut rg, mut rs) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let u = random_unit_field(&mut rng, g.n());
        let v = ScalarField::new(random_field(&mut rng, g.n()).values().iter().map(|a| a[0]).collect());
        let f = drift_f(&u, &v, &p, &g);
        let gg = diffusion_g(&u, &p, &g);
        let s = strat_correction_s(&u, &noise, &p, &g);
        for k in 0..g.n() {
            rf = rf.max(dot(f[k], u[k]).abs() / vec3::norm(f[k]).max(f64::MIN_POSITIVE));
            rg = rg.max(dot(gg[k], u[k]).abs() / vec3::norm(gg[k]).max(f64::MIN_POSITIVE));
            let kg = k2[k] * vec3::norm_sq(gg[k]);
            let scale = (kg + vec3::norm(s[k])).max(f64::MIN_POSITIVE);
            rs = rs.max((dot(s[k], u[k]) + kg).abs() / scale);
        }
    }
    let worst = rf.max(rg).max(rs);
    report(1, "sphere orthogonality", worst <= 1e-12, format!("F {rf:.1e}, G {rg:.1e}, S {rs:.1e} (tol 1e-12)"));
}

#[test]
fn criterion_02_discrete_calculus() {
    let g = WireGrid::new(0.1, 64, -3.2, Boundary::Periodic).unwrap();
    let h = g.h();
    let mut rng = stream_rng(102, 0);
    let (mut ibp, mut lap_exp, mut diff_exp, mut dd) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..500 {
        let u = random_unit_field(&mut rng, g.n());
        let w = random_field(&mut rng, g.n());
        let du = grid::forward_diff(&u, &g);
        let db = grid::backward_diff(&u, &g);
        let dw = grid::forward_diff(&w, &g);
        let lap = grid::discrete_laplacian(&u, &g);
        let a = grid::inner(&du, &dw, &g, None) + grid::inner(&lap, &w, &g, None);
        ibp = ibp.max(a.abs() / (grid::l2_norm_sq(&du, &g) * grid::l2_norm_sq(&dw, &g)).sqrt());
        for k in 0..g.n() {
            let e = -0.5 * (vec3::norm_sq(du[k]) + vec3::norm_sq(db[k]));
            lap_exp = lap_exp.max((dot(u[k], lap[k]) - e).abs() / e.abs());
            // rounding in ⟨u,∂ʰu⟩ scales with its operands, |u||∂ʰu| = |∂ʰu|
            let e = -0.5 * h * vec3::norm_sq(du[k]);
            diff_exp = diff_exp.max((dot(u[k], du[k]) - e).abs() / vec3::norm(du[k]));
        }
        let ddu = grid::forward_diff(&du, &g);
        let lap_plus = grid::shift(&lap, &g, grid::Direction::Forward);
        dd = dd.max((grid::l2_norm_sq(&ddu.sub(&lap_plus), &g) / grid::l2_norm_sq(&lap_plus, &g)).sqrt());
    }
    let worst = ibp.max(lap_exp).max(diff_exp).max(dd);
    report(
        2,
        "discrete calculus",
        worst <= 1e-12,
        format!("by parts {ibp:.1e}, <u,lap u> {lap_exp:.1e}, <u,du> {diff_exp:.1e}, dd {dd:.1e} (tol 1e-12)"),
    );
}

fn sphere_config() -> SimConfig {
    let g = WireGrid::new(0.1, 128, -6.35, Boundary::Clamped).unwrap();
    let mut c = SimConfig::new(g);
    c.params = PhysParams::new(1.0, 0.5).unwrap();
    c.noise = bumps(3, 0.02, 2.0);
    c.dt = 1e-3;
    c.t_final = 1.0;
    c.seed = 3;
    c
}

#[test]
fn criterion_03_sphere_preservation() {
    let c = sphere_config();
    let traj = simulate(&c).unwrap();
    let on = traj.records.iter().map(|r| r.sphere_dev).fold(0.0, f64::max);
    let mut off = Vec::new();
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let mut c = sphere_config();
        c.projection = false;
        c.dt = dt;
        c.snapshot_stride = c.step_count();
        off.push(simulate(&c).unwrap().final_state().sphere_deviation());
    }
    let ratios = [off[0] / off[1], off[1] / off[2]];
    let pass = on <= 1e-12 && ratios.iter().all(|r| (1.5..=3.0).contains(r));
    report(
        3,
        "sphere preservation",
        pass,
        format!("projected max dev {on:.1e}; unprojected [{}], ratios {:.3} {:.3}", sci(&off), ratios[0], ratios[1]),
    );
}

#[test]
fn criterion_04_energy_decay() {
    let g = WireGrid::spanning(-6.0, 6.0, 0.1, Boundary::Clamped).unwrap();
    let mut c = SimConfig::new(g);
    c.params = PhysParams::new(1.0, 1.0).unwrap();
    c.initial = InitialCondition::DomainWall { width: 0.7 };
    c.dt = 0.2 * 0.01;
    c.t_final = 2.0;
    c.snapshot_stride = c.step_count();
    let traj = simulate(&c).unwrap();
    let e: Vec<f64> = traj.records.iter().map(|r| r.energy).collect();
    let worst = e.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    report(
        4,
        "deterministic energy decay",
        worst <= 1e-10,
        format!("largest step increase {worst:.2e} over {} steps, energy {:.4} -> {:.4}", e.len() - 1, e[0], e[e.len() - 1]),
    );
}

#[test]
fn criterion_05_uniform_in_h() {
    let g = WireGrid::spanning(-8.0, 8.0, 0.2, Boundary::Clamped).unwrap();
    let mut c = SimConfig::new(g);
    c.params = PhysParams::new(1.0, 0.5).unwrap();
    c.noise = bumps(3, 0.02, 2.0);
    c.dt = 5e-4;
    c.t_final = 0.5;
    c.seed = 5;
    let hs = [0.2, 0.1, 0.05];
    let mut small = true;
    for &h in &hs {
        let noise = build_noise(&c.noise, &g.with_spacing(h).unwrap()).unwrap();
        small &= check_smallness(&noise, &c.monitor.smallness_inputs(&c.params, 1.0)).unwrap().satisfied();
    }
    let study = uniform_in_h_study(&c, &hs, 50).unwrap();
    let band = |f: fn(&lls_core::diagnostics::UniformRow) -> f64| {
        let v: Vec<f64> = study.rows.iter().map(f).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (be, bc) = (band(|r| r.sup_energy_mean), band(|r| r.cross_lap_mean));
    let complete = study.rows.iter().all(|r| r.paths == 50 && r.aborted == 0);
    let means: Vec<String> =
        study.rows.iter().map(|r| format!("h={}: {:.4}/{:.4}", r.h, r.sup_energy_mean, r.cross_lap_mean)).collect();
    report(
        5,
        "uniform-in-h stability",
        small && complete && be <= 2.0 && bc <= 2.0,
        format!("smallness {small}, sup energy band {be:.3}, cross-lap band {bc:.3} [{}]", means.join(", ")),
    );
}

#[test]
fn criterion_06_interpolation_identities() {
    let mut rng = stream_rng(106, 0);
    let (mut d2, mut d1, mut sup, mut jumps, mut recon) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for trial in 0..200 {
        let g = WireGrid::new(0.1, 64, -3.2, Boundary::Periodic).unwrap();
        let u = if trial % 2 == 0 {
            random_unit_field(&mut rng, g.n())
        } else {
            random_field(&mut rng, g.n())
        };
        let q = quad_interp(&u, &g);
        let n = interp_norms(&q);
        let lap = grid::l2_norm_sq(&grid::discrete_laplacian(&u, &g), &g).sqrt();
        d2 = d2.max((n.d2_l2 - lap).abs() / lap);
        let du = grid::l2_norm_sq(&grid::forward_diff(&u, &g), &g).sqrt();
        d1 = d1.max(n.d_l2 / du);
        let linf = u.pointwise_norms().into_iter().fold(0.0, f64::max);
        sup = sup.max(n.sup / linf);
        let (jv, jd) = q.knot_jumps();
        let dinf = grid::forward_diff(&u, &g).pointwise_norms().into_iter().fold(0.0, f64::max);
        jumps = jumps.max(jv / linf).max(jd / dinf);
        let r = remainders(&q, 3).unwrap();
        for (pt, r0) in r.points.iter().zip(r.values(Remainder::R0)) {
            recon = recon.max(vec3::norm(vec3::sub(vec3::sub(pt.u, r0), u[pt.cell])) / linf);
        }
    }
    let pass = d2 <= 1e-12 && d1 <= 3.0 && sup <= 5.0 && jumps <= 1e-12 && recon <= 1e-12;
    report(
        6,
        "interpolation identities",
        pass,
        format!(
            "|D2 ubar| vs |lap u| {d2:.1e}, |D ubar|/|du| {d1:.3} (<= 3), sup ratio {sup:.3} (<= 5), \
             jumps {jumps:.1e}, reconstruction {recon:.1e}"
        ),
    );
}

#[test]
fn criterion_07_remainder_decay() {
    let hs = [0.2, 0.1, 0.05, 0.025];
    let tests = standard_test_functions();
    let mut norms = vec![Vec::new(); 4];
    let mut pairings = vec![vec![Vec::new(); tests.len()]; 5];
    for &h in &hs {
        let g = WireGrid::spanning(-12.0, 12.0, h, Boundary::Clamped).unwrap();
        let u = VectorField::from_fn(&g, twisted_wall);
        let r = remainders(&quad_interp(&u, &g), 2).unwrap();
        for (i, k) in Remainder::ALL[..4].iter().enumerate() {
            norms[i].push(r.l2_norm(*k));
        }
        for (i, k) in Remainder::ALL[4..].iter().enumerate() {
            for (j, phi) in tests.iter().enumerate() {
                pairings[i][j].push(r.pairing(*k, |x| phi.eval(x)).abs());
            }
        }
    }
    let norm_slopes: Vec<f64> = norms.iter().map(|v| loglog_slope(&hs, v)).collect();
    let pair_slopes: Vec<f64> =
        pairings.iter().map(|per| per.iter().map(|v| loglog_slope(&hs, v)).fold(f64::INFINITY, f64::min)).collect();
    let worst = norm_slopes.iter().chain(&pair_slopes).cloned().fold(f64::INFINITY, f64::min);
    let fmt = |kinds: &[Remainder], s: &[f64]| {
        kinds.iter().zip(s).map(|(k, s)| format!("{} {s:.3}", k.name())).collect::<Vec<_>>().join(", ")
    };
    report(
        7,
        "remainder decay",
        worst >= 0.9,
        format!(
            "L2 slopes [{}]; worst pairing slopes [{}] (>= 0.9)",
            fmt(&Remainder::ALL[..4], &norm_slopes),
            fmt(&Remainder::ALL[4..], &pair_slopes)
        ),
    );
}

#[test]
fn criterion_08_sphere_recovery() {
    let hs = [0.2, 0.1, 0.05];
    let mut dev = Vec::new();
    for &h in &hs {
        let g = WireGrid::spanning(-10.0, 10.0, h, Boundary::Clamped).unwrap();
        let mut c = SimConfig::new(g);
        c.params = PhysParams::new(1.0, 0.5).unwrap();
        c.noise = bumps(3, 0.02, 2.0);
        c.dt = 0.2 * 0.05 * 0.05;
        c.t_final = 0.5;
        c.snapshot_stride = 10;
        c.seed = 8;
        dev.push(sphere_recovery_integral(&simulate(&c).unwrap()));
    }
    let slope = loglog_slope(&hs, &dev);
    report(8, "|ubar| -> 1", slope >= 1.9, format!("integrated deviation [{}], order {slope:.3} (>= 1.9)", sci(&dev)));
}

#[test]
fn criterion_09_ito_stratonovich() {
    let g = WireGrid::spanning(-8.0, 8.0, 0.1, Boundary::Clamped).unwrap();
    let mut dists = Vec::new();
    for level in 0..3 {
        let mut c = SimConfig::new(g);
        c.params = PhysParams::new(1.0, 0.5).unwrap();
        c.noise = bumps(1, 0.02, 2.0);
        c.dt = 0.2 * 0.01 / 2f64.powi(level);
        c.t_final = 0.5;
        c.snapshot_stride = c.step_count();
        let ito = simulate(&c).unwrap();
        c.scheme = Scheme::HeunStratonovich;
        let strat = simulate(&c).unwrap();
        let d = ito.final_state().sub(strat.final_state());
        dists.push(grid::l2_norm_sq(&d, &g).sqrt());
    }
    let pass = dists[1] < dists[0] && dists[2] < dists[1];
    report(9, "Ito/Stratonovich cross-validation", pass, format!("distances [{}] (strictly decreasing)", sci(&dists)));
}

#[test]
fn criterion_10_uniqueness() {
    let g = WireGrid::spanning(-6.0, 6.0, 0.1, Boundary::Clamped).unwrap();
    let mut c = SimConfig::new(g);
    c.params = PhysParams::new(1.0, 0.5).unwrap();
    c.noise = bumps(3, 0.02, 2.0);
    c.dt = 1e-3;
    c.t_final = 0.5;
    c.seed = 10;
    let (a, b) = (simulate(&c).unwrap(), simulate(&c).unwrap());
    let bits = |t: &lls_core::integrator::Trajectory| -> Vec<u64> {
        t.states.iter().flat_map(|m| m.values().iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>()).collect()
    };
    let identical = bits(&a) == bits(&b);
    let d6 = *uniqueness_check(&c, 1e-6, None).unwrap().distances.last().unwrap();
    let d8 = *uniqueness_check(&c, 1e-8, None).unwrap().distances.last().unwrap();
    let ratio = d6 / d8;
    let pass = identical && (10.0..=1000.0).contains(&ratio);
    report(
        10,
        "pathwise uniqueness",
        pass,
        format!("bitwise identical {identical}; final distances {d6:.3e} / {d8:.3e} = {ratio:.2} (expect 100 within x10)"),
    );
}

#[test]
fn criterion_11_noise_statistics() {
    let g = WireGrid::spanning(-5.0, 5.0, 0.1, Boundary::Clamped).unwrap();
    let noise = build_noise(&bumps(3, 0.3, 1.0), &g).unwrap();
    let probes = [50, 62, 75];
    let (steps, dt, paths) = (10, 0.1, 10_000);
    let t = steps as f64 * dt;
    let mut samples = vec![Vec::with_capacity(paths); probes.len()];
    for i in 0..paths {
        let mut rng = stream_rng(11, i as u64);
        let mut w = vec![0.0; g.n()];
        for _ in 0..steps {
            let dw = noise.sample_increment(dt, &mut rng);
            for (a, b) in w.iter_mut().zip(dw.values()) {
                *a += b;
            }
        }
        for (s, &k) in samples.iter_mut().zip(&probes) {
            s.push(w[k]);
        }
    }
    let mut pass = true;
    let mut detail = Vec::new();
    for (s, &k) in samples.iter().zip(&probes) {
        let (mean, se) = mean_and_se(s);
        let sq: Vec<f64> = s.iter().map(|w| (w - mean).powi(2)).collect();
        let (var, var_se) = mean_and_se(&sq);
        let expect = t * noise.kappa_sq()[k];
        let zm = mean / se;
        let zv = (var - expect) / var_se;
        pass &= zm.abs() <= 4.0 && zv.abs() <= 4.0;
        detail.push(format!("x={:.1}: mean z {zm:.2}, var {var:.4} vs {expect:.4} z {zv:.2}", g.x(k)));
    }
    report(11, "noise statistics", pass, detail.join("; "));
}

#[test]
fn criterion_12_h_refinement() {
    let g = WireGrid::spanning(-6.0, 6.0, 0.2, Boundary::Clamped).unwrap();
    let mut c = SimConfig::new(g);
    c.params = PhysParams::new(1.0, 0.5).unwrap();
    c.noise = bumps(3, 0.02, 2.0);
    c.dt = 0.2 * 0.05 * 0.05;
    c.t_final = 0.5;
    c.snapshot_stride = 20;
    c.seed = 12;
    let study = convergence_study(&c, &[0.2, 0.1, 0.05]).unwrap();
    let d: Vec<f64> = study.rows.iter().map(|r| r.sup_l2w).collect();
    let pass = d.len() == 2 && d[1] < d[0];
    report(12, "h-refinement Cauchy", pass, format!("sup_t L2_w distances [{}] (decreasing)", sci(&d)));
}
