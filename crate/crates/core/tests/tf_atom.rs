use std::sync::Arc;

use fermisurf::constants::{sommerfeld, tf_length, xi};
use fermisurf::numerics::ode::{integrate, Control, OdeOptions};
use fermisurf::numerics::powerlaw_fit;
use fermisurf::tf_atom::{atomic_screened_tf, atomic_tf, scaled_grid, solve_universal, UniversalTF};

/// Fixed-step RK4 in `s = √x`, where the system is regular at the origin.
fn oracle_shoot(b: f64) -> i32 {
    let ds = 2e-4;
    let (mut s, mut y, mut p) = (0.0f64, 1.0f64, b);
    let f = |s: f64, y: f64, p: f64| (2.0 * s * p, 2.0 * y.max(0.0).powf(1.5));
    while s < 12.0 {
        let (k1y, k1p) = f(s, y, p);
        let (k2y, k2p) = f(s + ds / 2.0, y + ds / 2.0 * k1y, p + ds / 2.0 * k1p);
        let (k3y, k3p) = f(s + ds / 2.0, y + ds / 2.0 * k2y, p + ds / 2.0 * k2p);
        let (k4y, k4p) = f(s + ds, y + ds * k3y, p + ds * k3p);
        y += ds / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += ds / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        s += ds;
        if y < 0.0 {
            return -1;
        }
        if p > 0.0 {
            return 1;
        }
    }
    0
}

fn oracle_slope() -> f64 {
    let (mut lo, mut hi) = (-2.0, -1.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        match oracle_shoot(mid) {
            -1 => lo = mid,
            1 => hi = mid,
            _ => return mid,
        }
    }
    0.5 * (lo + hi)
}

fn universal() -> Arc<UniversalTF<f64>> {
    Arc::new(solve_universal(1e6, 1e-12).unwrap())
}

#[test]
fn slope_matches_independent_oracle() {
    let u = universal();
    let oracle = oracle_slope();
    assert!((oracle + 1.588_071_0).abs() < 1e-5, "oracle {oracle}");
    assert!((u.slope_b() - oracle).abs() < 1e-5);
    assert!((u.slope_b() + 1.588_071_022_611_375).abs() < 1e-9, "{}", u.slope_b());
}

#[test]
fn sommerfeld_solution_is_reproduced_by_the_integrator() {
    let opts = OdeOptions {
        rtol: 1e-13,
        atol: 1e-18,
        h_init: 1e-3,
        max_steps: 1_000_000,
    };
    let (_, u) = integrate(
        |x: f64, u: &[f64; 2]| [u[1], u[0].max(0.0).powf(1.5) / x.sqrt()],
        100.0,
        [144e-6, -432e-8],
        1.0,
        &opts,
        |_, _| Control::Continue,
    )
    .unwrap();
    assert!((u[0] - 144.0).abs() < 1e-8 * 144.0, "{}", u[0]);
}

#[test]
fn profile_is_positive_decreasing_and_reaches_the_tail() {
    let u = universal();
    let mut prev = 1.0;
    let mut x = 1e-6;
    while x < 1e7 {
        let (y, dy) = u.eval(x);
        assert!(y > 0.0 && y < prev && dy < 0.0, "x={x}");
        prev = y;
        x *= 1.07;
    }
    let x: f64 = 1e6;
    let deficit = 1.0 - x.powi(3) * u.y(x) / 144.0;
    assert!(deficit > 0.0 && deficit < 1e-3);
    assert!(u.match_gap() < 1e-6, "{}", u.match_gap());
    let (y, _) = u.eval(0.0);
    assert_eq!(y, 1.0);
}

#[test]
fn energy_two_ways_and_scaling() {
    let u = universal();
    let mut per = Vec::new();
    for z in [1.0f64, 8.0, 27.0] {
        let g = Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01).unwrap());
        let sol = atomic_tf(z, g, u.clone()).unwrap();
        let q = sol.rho().integral();
        assert!((q - z).abs() < 1e-6 * z, "charge {q}");
        let e = sol.energy();
        assert!((e - sol.energy_from_slope()).abs() < 1e-6 * e.abs());
        assert!(sol.residual() < 1e-6, "{}", sol.residual());
        per.push(e / z.powf(7.0 / 3.0));
    }
    assert!((per[0] + 0.768_745).abs() < 1e-6, "{}", per[0]);
    for p in &per {
        assert!((p / per[0] - 1.0).abs() < 1e-3);
    }
}

#[test]
fn density_scaling_covariance() {
    let u = universal();
    let g1 = Arc::new(scaled_grid(1.0, 1e-6, 1e6, 0.01).unwrap());
    let g8 = Arc::new(scaled_grid(8.0, 1e-6, 1e6, 0.01).unwrap());
    let a1 = atomic_tf(1.0, g1, u.clone()).unwrap();
    let a8 = atomic_tf(8.0, g8, u).unwrap();
    for r in [0.01, 0.3, 2.0, 11.0] {
        let lhs = a8.rho_at(r);
        let rhs = 64.0 * a1.rho_at(2.0 * r);
        assert!((lhs / rhs - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sommerfeld_majorant_and_tail() {
    let u = universal();
    let cs = sommerfeld::<f64>();
    for z in [1.0f64, 6.0] {
        let g = Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01).unwrap());
        let sol = atomic_tf(z, g.clone(), u.clone()).unwrap();
        let phi = sol.phi().values();
        for (&r, &p) in g.nodes().iter().zip(phi) {
            assert!(r.powi(4) * p <= cs, "r={r}");
        }
        let b = sol.length();
        let mut rs = Vec::new();
        let mut deficit = Vec::new();
        for (&r, &p) in g.nodes().iter().zip(phi) {
            let x = r / b;
            if (1e4..=1e6).contains(&x) {
                let v = r.powi(4) * p;
                assert!(v >= 0.98 * cs, "x={x} {v}");
                rs.push(r);
                deficit.push(cs - v);
            }
        }
        let fit = powerlaw_fit(&rs, &deficit, 0.0, f64::INFINITY).unwrap();
        assert!((fit.exponent + xi::<f64>()).abs() < 2e-3, "{}", fit.exponent);
    }
}

#[test]
fn screened_potential_matches_direct_quadrature() {
    let u = universal();
    let z = 6.0;
    let g = Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01).unwrap());
    let sol = atomic_tf(z, g, u).unwrap();
    let r = 0.4;
    let phi_r = atomic_screened_tf(&sol, r).unwrap();
    // Direct shell sum over 0 < t < r in log spacing.
    let direct = |s: f64| -> f64 {
        let n = 200_000;
        let (la, lb) = ((1e-9f64).ln(), r.ln());
        let dl = (lb - la) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let t = (la + (i as f64 + 0.5) * dl).exp();
            acc += 4.0 * std::f64::consts::PI * t.powi(3) * sol.rho_at(t) / s.max(t) * dl;
        }
        z / s - acc
    };
    for s in [0.05, 0.2, 0.4, 0.9, 3.0] {
        let a = sol.screened_at(s, r);
        let d = direct(s);
        assert!((a - d).abs() < 1e-6 * (1.0 + d.abs()), "s={s} {a} {d}");
    }
    let gr = phi_r.grid().clone();
    let i = gr.locate(2.0);
    assert!((phi_r.values()[i] - sol.screened_at(gr.nodes()[i], r)).abs() < 1e-14);
    assert!(atomic_screened_tf(&sol, 1e9).is_err());
    // Vanishing screening radius leaves the bare nucleus.
    let tiny = sol.screened_at(1.0, 1e-9);
    assert!((tiny - z).abs() < 1e-6);
}

#[test]
fn screened_sphere_value_approaches_four_sommerfeld() {
    let u = universal();
    let cs = sommerfeld::<f64>();
    let z = 1.0;
    let g = Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01).unwrap());
    let sol = atomic_tf(z, g, u).unwrap();
    let b = tf_length::<f64>();
    let mut prev = 0.0;
    for x in [1e2, 1e3, 1e4, 1e5] {
        let r = x * b;
        let v = r.powi(4) * sol.screened_at(r, r);
        assert!(v < 4.0 * cs && v > prev);
        prev = v;
    }
    assert!((prev / (4.0 * cs) - 1.0).abs() < 0.02);
}

#[test]
fn short_grids_are_rejected() {
    let u = universal();
    let g = Arc::new(scaled_grid(1.0, 1e-6, 3.0, 0.01).unwrap());
    assert!(atomic_tf(1.0, g, u.clone()).is_err());
    let g = Arc::new(scaled_grid(1.0, 1e-6, 1e4, 0.01).unwrap());
    assert!(atomic_tf(-1.0, g, u).is_err());
}

#[test]
fn single_precision_slope() {
    let u = solve_universal(100.0f32, 1e-6).unwrap();
    assert!((u.slope_b() + 1.588_071).abs() < 2e-4, "{}", u.slope_b());
}
