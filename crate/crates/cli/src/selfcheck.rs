//! Fast closed-form checks over every module.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::json;

use fermisurf::bo_surface::{bo_tf, outside_decomposition_check, qij_profiles, Constants};
use fermisurf::ks_lda::{aufbau, check_exchange_bound, exchange_energy, make_functional, scf_atom, atom_grid, XcKind};
use fermisurf::numerics::ode::{integrate, Control, OdeOptions};
use fermisurf::numerics::poisson::poisson_solve;
use fermisurf::numerics::{powerlaw_fit, FieldKind};
use fermisurf::snapshot::{config_digest, Snapshot};
use fermisurf::tf_atom::{atomic_tf, scaled_grid, solve_universal};
use fermisurf::{Grid3D, GridField, GridPolicy, NuclearConfiguration, ScfOptions, TfOptions};

use crate::cache::cache_key;
use crate::error::CliError;
use crate::output::num;

type Check = (&'static str, fn() -> Result<bool, fermisurf::Error>);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn poisson_zero() -> Result<bool, fermisurf::Error> {
    let g = Grid3D::new([-1.0; 3], 0.25, [9, 9, 9])?;
    let u = poisson_solve(&g, &vec![0.0; g.len()]);
    Ok(u.iter().all(|&v| v == 0.0))
}

fn powerlaw_exact() -> Result<bool, fermisurf::Error> {
    let xs: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x.powi(-7)).collect();
    let f = powerlaw_fit(&xs, &ys, 0.0, f64::INFINITY)?;
    let c = powerlaw_fit(&xs, &vec![2.0; xs.len()], 0.0, f64::INFINITY)?;
    Ok(close(f.exponent, -7.0, 1e-10)
        && close(f.prefactor, 5.0, 1e-9)
        && close(f.r_squared, 1.0, 1e-12)
        && close(c.exponent, 0.0, 1e-12))
}

fn tf_particular_solution() -> Result<bool, fermisurf::Error> {
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
    )?;
    Ok(close(u[0], 144.0, 1e-8 * 144.0))
}

fn tf_scaling() -> Result<bool, fermisurf::Error> {
    let u = Arc::new(solve_universal(1e6, 1e-12)?);
    if !close(u.y(1e-14), 1.0, 1e-10) {
        return Ok(false);
    }
    let mut e = Vec::new();
    for z in [1.0f64, 8.0, 27.0] {
        let g = Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01)?);
        e.push(atomic_tf(z, g, u.clone())?.energy() / z.powf(7.0 / 3.0));
    }
    Ok(e.iter().all(|&v| close(v, e[0], 1e-3 * e[0].abs())))
}

fn screening_vanishes_for_small_balls() -> Result<bool, fermisurf::Error> {
    let u = Arc::new(solve_universal(1e6, 1e-12)?);
    let z = 6.0;
    let a = atomic_tf(z, Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01)?), u)?;
    let s = 0.5;
    Ok(close(a.screened_at(s, 1e-6) * s / z, 1.0, 1e-6))
}

fn strict_xc() -> Result<bool, fermisurf::Error> {
    let power = make_functional::<f64>(XcKind::Power { c: 1.0, beta: 1.0 }, true).is_err();
    let zero_strict = make_functional::<f64>(XcKind::Zero, true).is_err();
    let zero_plain = make_functional::<f64>(XcKind::Zero, false).is_ok();
    let lda = make_functional::<f64>(XcKind::LdaExchange, true).is_ok();
    Ok(power && zero_strict && zero_plain && lda)
}

fn exchange_energy_closed_forms() -> Result<bool, fermisurf::Error> {
    let xc = make_functional::<f64>(XcKind::LdaExchange, false)?;
    let g = Grid3D::new([0.0; 3], 0.1, [10, 10, 10])?;
    let zero = exchange_energy(&g, &vec![0.0; g.len()], &xc)?;
    let t0 = 0.7;
    let uniform = exchange_energy(&g, &vec![t0; g.len()], &xc)?;
    Ok(zero == 0.0 && close(uniform, 0.738_558_766_4 * f64::powf(t0, 4.0 / 3.0), 1e-9))
}

fn empty_state() -> Result<bool, fermisurf::Error> {
    let xc = make_functional::<f64>(XcKind::LdaExchange, false)?;
    let s = scf_atom(1.0, 0.0, &xc, Arc::new(atom_grid(1.0)?), 2.0, &ScfOptions::default())?;
    let bound = check_exchange_bound(&s, &xc, &[0.1, 1.0, 10.0]);
    Ok(s.total_energy() == 0.0 && s.orbitals().iter().all(|o| o.occupation == 0.0) && bound.passed())
}

fn aufbau_fills_lowest() -> Result<bool, fermisurf::Error> {
    let occ = aufbau(&[(-2.0, 1), (-0.5, 3), (-0.1, 1)], 4.0, 2.0)?;
    Ok(close(occ[0], 2.0, 1e-15) && close(occ[1], 2.0 / 3.0, 1e-15) && occ[2] == 0.0)
}

fn single_nucleus() -> Result<bool, fermisurf::Error> {
    let u = Arc::new(solve_universal(1e6, 1e-12)?);
    let c = NuclearConfiguration::atom(3.0)?;
    let p = GridPolicy {
        h: 0.5,
        ..GridPolicy::default()
    };
    let d = bo_tf(&c, &p, u.clone(), &TfOptions::default())?.d;
    let gap = outside_decomposition_check(&c, 0.2, &p, u, &TfOptions::default(), 64)?.gap;
    Ok(d == 0.0 && gap == 0.0)
}

fn qij_closed_forms() -> Result<bool, fermisurf::Error> {
    let r = 0.4;
    let c = NuclearConfiguration::diatomic(3.0, 5.0, 2.0)?;
    let vol = 4.0 / 3.0 * PI * r * r * r;
    let b1 = move |s: f64| if s < r { 3.0 / vol } else { 0.0 };
    let b2 = move |s: f64| if s < r { 5.0 / vol } else { 0.0 };
    let q = qij_profiles(&c, &[&b1, &b2], r)?;
    let zero = |_: f64| 0.0;
    let e = qij_profiles(&c, &[&zero, &zero], 0.1)?;
    Ok(q[0][1].abs() < 1e-10 && q[0][0] == 0.0 && close(e[0][1], 7.5, 1e-14))
}

fn constants() -> Result<bool, fermisurf::Error> {
    let k = Constants::<f64>::new();
    Ok(close(k.c_s, 81.0 * PI * PI / 8.0, 1e-12)
        && close(k.xi * k.eta, 6.0, 1e-12)
        && k.exponents.binding == -7.0
        && k.exponents.screening == -4.0)
}

fn snapshot_round_trip() -> Result<bool, fermisurf::Error> {
    let g = Arc::new(Grid3D::new([-0.5, 0.0, 0.5], 0.25, [3, 4, 5])?);
    let vals: Vec<f64> = (0..g.len()).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let f = GridField::new(g, vals, FieldKind::Density)?;
    let s = Snapshot::from_grid_field(&f, config_digest(&NuclearConfiguration::atom(1.0)?));
    Ok(Snapshot::from_bytes(&s.to_bytes())? == s)
}

fn cache_keys_track_tolerances() -> Result<bool, fermisurf::Error> {
    let a = cache_key("bo-tf", &json!({ "tol": 1e-10 }));
    let b = cache_key("bo-tf", &json!({ "tol": 1e-11 }));
    Ok(a != b && a == cache_key("bo-tf", &json!({ "tol": 1e-10 })))
}

fn csv_numbers_round_trip() -> Result<bool, fermisurf::Error> {
    Ok([0.1, 1.0 / 3.0, -7.25e-200, 6.02e23]
        .iter()
        .all(|&x| num(x).parse::<f64>().map(f64::to_bits) == Ok(x.to_bits())))
}

const CHECKS: &[Check] = &[
    ("poisson_zero_source", poisson_zero),
    ("powerlaw_exact_data", powerlaw_exact),
    ("tf_particular_solution", tf_particular_solution),
    ("tf_scaling_covariance", tf_scaling),
    ("screening_small_ball_limit", screening_vanishes_for_small_balls),
    ("strict_xc_conditions", strict_xc),
    ("exchange_energy_closed_forms", exchange_energy_closed_forms),
    ("empty_ks_state", empty_state),
    ("aufbau_lowest_levels", aufbau_fills_lowest),
    ("single_nucleus_zero_binding", single_nucleus),
    ("qij_closed_forms", qij_closed_forms),
    ("constants", constants),
    ("snapshot_round_trip", snapshot_round_trip),
    ("cache_keys_track_tolerances", cache_keys_track_tolerances),
    ("csv_numbers_round_trip", csv_numbers_round_trip),
];

pub fn run() -> Result<(), CliError> {
    let mut failed = Vec::new();
    for (name, check) in CHECKS {
        let status = match check() {
            Ok(true) => "PASS".to_string(),
            Ok(false) => "FAIL".to_string(),
            Err(e) => format!("FAIL ({e})"),
        };
        if status != "PASS" {
            failed.push(*name);
        }
        println!("selfcheck: {status} {name}");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("failed checks: {}", failed.join(", "))))
    }
}
