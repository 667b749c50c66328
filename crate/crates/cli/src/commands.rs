//! Command implementations. Every command validates its whole plan before
//! the first solve.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use fermisurf::bo_surface::{
    at_distance, bo_ks, bo_tf, gamma_from_points, min_distance_search, outside_decomposition_check, qij_tf,
    screened_compare, BOCurve, Theory,
};
use fermisurf::constants::sommerfeld;
use fermisurf::ks_lda::{atom_grid, ks_grid, scf_atom, scf_molecule};
use fermisurf::numerics::powerlaw_fit;
use fermisurf::snapshot::{config_digest, Snapshot};
use fermisurf::tf_atom::{atomic_tf, scaled_grid, solve_universal};
use fermisurf::tf_molecule::{solve_tf, tf_grid, AtomSet};
use fermisurf::{
    BoPoint, GridPolicy, KsGridPolicy, NuclearConfiguration, PowerLawFit, ScfOptions, TfOptions, UniversalTF,
    XcFunctional,
};

use crate::cache::{Cache, Entry};
use crate::config::{increasing, RunConfig, TheoryTag, UNIVERSAL_X_MAX};
use crate::error::CliError;
use crate::output::{Cell, OutDir, Table};

pub struct Context {
    pub cfg: RunConfig,
    pub strict: bool,
    pub cache: Cache,
    pub out: OutDir,
    pub pool: rayon::ThreadPool,
    universal: OnceLock<Arc<UniversalTF>>,
}

impl Context {
    pub fn new(cfg: RunConfig, strict: bool, cache: Cache, out: OutDir, workers: usize) -> Result<Self, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Self {
            cfg,
            strict,
            cache,
            out,
            pool,
            universal: OnceLock::new(),
        })
    }

    fn universal(&self) -> Result<Arc<UniversalTF>, CliError> {
        if let Some(u) = self.universal.get() {
            return Ok(u.clone());
        }
        let u = Arc::new(solve_universal(UNIVERSAL_X_MAX, self.cfg.universal_tol())?);
        Ok(self.universal.get_or_init(|| u).clone())
    }

    fn universal_json(&self) -> Value {
        json!({ "x_max": UNIVERSAL_X_MAX, "tol": self.cfg.universal_tol() })
    }

    fn xc_json(&self) -> Value {
        json!({ "kind": self.cfg.xc, "strict": self.strict })
    }

    /// Runs `f` over `items` on the worker pool, keeping input order.
    fn par_map<I, O, F>(&self, items: &[I], f: F) -> Result<Vec<O>, CliError>
    where
        I: Sync,
        O: Send,
        F: Fn(&I) -> Result<O, CliError> + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>()).into_iter().collect()
    }
}

fn invalid(e: fermisurf::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn config_json(c: &NuclearConfiguration) -> Value {
    json!({ "charges": c.charges(), "positions": c.positions() })
}

fn tf_policy_json(p: &GridPolicy) -> Value {
    json!({ "h": p.h, "margin_factor": p.margin_factor, "max_points": p.max_points })
}

fn ks_policy_json(p: &KsGridPolicy) -> Value {
    json!({ "h": p.h, "margin": p.margin, "max_points": p.max_points })
}

fn tf_opts_json(o: &TfOptions) -> Value {
    json!({ "tol": o.tol, "max_newton": o.max_newton, "cg_rtol": o.cg_rtol, "max_cg": o.max_cg, "mu_tol": o.mu_tol })
}

fn scf_json(o: &ScfOptions) -> Value {
    json!({
        "density_tol": o.density_tol,
        "eigen_tol": o.eigen_tol,
        "max_iter": o.max_iter,
        "depth": o.depth,
        "mixing": o.mixing,
        "l_max": o.l_max,
        "states_per_l": o.states_per_l,
        "extra_states": o.extra_states,
        "seed": o.seed,
    })
}

fn last_residual(history: &[f64]) -> f64 {
    history.last().copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FitRecord {
    exponent: f64,
    prefactor: f64,
    r_squared: f64,
    exponent_stderr: f64,
    points: usize,
}

impl From<PowerLawFit> for FitRecord {
    fn from(f: PowerLawFit) -> Self {
        Self {
            exponent: f.exponent,
            prefactor: f.prefactor,
            r_squared: f.r_squared,
            exponent_stderr: f.exponent_stderr,
            points: f.points,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PointRecord {
    r_min: f64,
    d: f64,
    e_mol: f64,
    e_atoms: f64,
    u_r: f64,
    grid_h: f64,
    dims: [usize; 3],
    residual: f64,
}

impl From<BoPoint> for PointRecord {
    fn from(p: BoPoint) -> Self {
        Self {
            r_min: p.r_min,
            d: p.d,
            e_mol: p.e_mol,
            e_atoms: p.e_atoms,
            u_r: p.u_r,
            grid_h: p.grid_h,
            dims: p.dims,
            residual: p.residual,
        }
    }
}

impl From<&PointRecord> for BoPoint {
    fn from(p: &PointRecord) -> Self {
        BoPoint {
            r_min: p.r_min,
            d: p.d,
            e_mol: p.e_mol,
            e_atoms: p.e_atoms,
            u_r: p.u_r,
            grid_h: p.grid_h,
            dims: p.dims,
            residual: p.residual,
        }
    }
}

fn tf_point(ctx: &Context, config: &NuclearConfiguration, policy: &GridPolicy) -> Result<PointRecord, CliError> {
    let opts = ctx.cfg.tf_options();
    let inputs = json!({
        "config": config_json(config),
        "policy": tf_policy_json(policy),
        "tf": tf_opts_json(&opts),
        "universal": ctx.universal_json(),
    });
    let e = ctx.cache.get_or_solve("bo-tf", &inputs, || {
        let p = bo_tf(config, policy, ctx.universal()?, &opts)?;
        Ok(Entry {
            scalars: PointRecord::from(p),
            snapshot: None,
        })
    })?;
    Ok(e.scalars)
}

fn ks_point(
    ctx: &Context,
    config: &NuclearConfiguration,
    xc: &XcFunctional,
    policy: &KsGridPolicy,
) -> Result<PointRecord, CliError> {
    let opts = ctx.cfg.scf_options();
    let inputs = json!({
        "config": config_json(config),
        "policy": ks_policy_json(policy),
        "scf": scf_json(&opts),
        "xc": ctx.xc_json(),
        "q": ctx.cfg.q,
    });
    let e = ctx.cache.get_or_solve("bo-ks", &inputs, || {
        let p = bo_ks(config, xc, policy, ctx.cfg.q, &opts)?;
        Ok(Entry {
            scalars: PointRecord::from(p),
            snapshot: None,
        })
    })?;
    Ok(e.scalars)
}

fn require_tf_q(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.q != 2.0 {
        return Err(CliError::Config("Thomas-Fermi solves use spin degeneracy q = 2".into()));
    }
    Ok(())
}

fn check_tf_grids(configs: &[NuclearConfiguration], policies: &[GridPolicy]) -> Result<(), CliError> {
    for c in configs {
        for p in policies {
            tf_grid(c, p).map_err(invalid)?;
        }
    }
    Ok(())
}

fn check_ks_grids(configs: &[NuclearConfiguration], policies: &[KsGridPolicy]) -> Result<(), CliError> {
    for c in configs {
        for p in policies {
            ks_grid(c, p).map_err(invalid)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TfAtomRecord {
    z: f64,
    energy: f64,
    energy_from_slope: f64,
    slope_b: f64,
    mu: f64,
    r4phi_max: f64,
    tail_min: f64,
    tail_fit: Option<FitRecord>,
    dt: f64,
    residual: f64,
}

/// Window of the Sommerfeld tail in units of the TF length.
const TAIL_WINDOW: (f64, f64) = (1e4, 1e6);

pub fn tf_atom(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    cfg.require_charges(1)?;
    cfg.check_radial()?;
    for &z in &cfg.charges {
        scaled_grid(z, cfg.radial.x_min, cfg.radial.x_max, cfg.radial.dt).map_err(invalid)?;
    }
    let cs = sommerfeld::<f64>();
    let rows = ctx.par_map(&cfg.charges, |&z| {
        let inputs = json!({ "z": z, "radial": cfg.radial, "universal": ctx.universal_json() });
        let e = ctx.cache.get_or_solve("tf-atom", &inputs, || {
            let grid = Arc::new(scaled_grid(z, cfg.radial.x_min, cfg.radial.x_max, cfg.radial.dt)?);
            let sol = atomic_tf(z, grid.clone(), ctx.universal()?)?;
            let b = sol.length();
            let mut r4phi_max = f64::NEG_INFINITY;
            let (mut rs, mut deficit) = (Vec::new(), Vec::new());
            let mut tail_min = f64::INFINITY;
            for (&r, &p) in grid.nodes().iter().zip(sol.phi().values()) {
                let v = r.powi(4) * p;
                r4phi_max = r4phi_max.max(v);
                let x = r / b;
                if (TAIL_WINDOW.0..=TAIL_WINDOW.1).contains(&x) {
                    tail_min = tail_min.min(v);
                    rs.push(r);
                    deficit.push(cs - v);
                }
            }
            let tail_fit = powerlaw_fit(&rs, &deficit, 0.0, f64::INFINITY).ok().map(FitRecord::from);
            Ok(Entry {
                scalars: TfAtomRecord {
                    z,
                    energy: sol.energy(),
                    energy_from_slope: sol.energy_from_slope(),
                    slope_b: sol.universal().slope_b(),
                    mu: sol.mu(),
                    r4phi_max,
                    tail_min,
                    tail_fit,
                    dt: grid.dt(),
                    residual: sol.residual(),
                },
                snapshot: None,
            })
        })?;
        Ok(e.scalars)
    })?;
    let mut t = Table::new(&[
        "z",
        "E_TF",
        "e_TF",
        "E_slope",
        "B",
        "mu",
        "sommerfeld",
        "r4phi_max",
        "r4phi_tail_min",
        "tail_exponent",
        "tail_r_squared",
        "grid_h",
        "residual",
    ]);
    for r in &rows {
        let (exp, r2) = r.tail_fit.as_ref().map_or((f64::NAN, f64::NAN), |f| (f.exponent, f.r_squared));
        t.push(vec![
            r.z.into(),
            r.energy.into(),
            (r.energy / r.z.powf(7.0 / 3.0)).into(),
            r.energy_from_slope.into(),
            r.slope_b.into(),
            r.mu.into(),
            cs.into(),
            r.r4phi_max.into(),
            r.tail_min.into(),
            exp.into(),
            r2.into(),
            r.dt.into(),
            r.residual.into(),
        ]);
    }
    ctx.out.write_csv("tf_atom", &t)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TfMoleculeRecord {
    r_min: f64,
    z_total: f64,
    n: f64,
    energy: f64,
    atom_energy: f64,
    binding: f64,
    mu: f64,
    grid_h: f64,
    dims: [usize; 3],
    residual: f64,
    iterations: usize,
}

pub fn tf_molecule(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    require_tf_q(cfg)?;
    cfg.check_grid()?;
    let config = cfg.configuration()?;
    let n = cfg.electrons_for(config.total_charge())?;
    if n <= 0.0 {
        return Err(CliError::Config("the TF molecule needs a positive electron number".into()));
    }
    let policies = cfg.tf_policies();
    check_tf_grids(std::slice::from_ref(&config), &policies)?;
    let opts = cfg.tf_options();
    let digest = config_digest(&config);
    let entries = ctx.par_map(&policies, |policy| {
        let inputs = json!({
            "config": config_json(&config),
            "n": n,
            "policy": tf_policy_json(policy),
            "tf": tf_opts_json(&opts),
            "universal": ctx.universal_json(),
        });
        ctx.cache.get_or_solve("tf-molecule", &inputs, || {
            let grid = Arc::new(tf_grid(&config, policy)?);
            let sol = solve_tf(&config, n, grid.clone(), ctx.universal()?, &opts)?;
            Ok(Entry {
                scalars: TfMoleculeRecord {
                    r_min: config.r_min(),
                    z_total: config.total_charge(),
                    n,
                    energy: sol.energy(),
                    atom_energy: sol.atom_energy(),
                    binding: sol.binding(),
                    mu: sol.mu(),
                    grid_h: grid.h(),
                    dims: grid.dims(),
                    residual: sol.residual(),
                    iterations: sol.iterations(),
                },
                snapshot: Some(Snapshot::from_grid_field(sol.rho(), digest)),
            })
        })
    })?;
    let mut t = Table::new(&[
        "level", "R_min", "Z", "N", "E", "E_atoms", "D", "mu", "nx", "ny", "nz", "grid_h", "residual", "iterations",
    ]);
    for (level, e) in entries.iter().enumerate() {
        let r = &e.scalars;
        t.push(vec![
            level.into(),
            r.r_min.into(),
            r.z_total.into(),
            r.n.into(),
            r.energy.into(),
            r.atom_energy.into(),
            r.binding.into(),
            r.mu.into(),
            r.dims[0].into(),
            r.dims[1].into(),
            r.dims[2].into(),
            r.grid_h.into(),
            r.residual.into(),
            r.iterations.into(),
        ]);
        if let Some(s) = &e.snapshot {
            ctx.out.write_bytes(&format!("tf_molecule_rho_{level}.fsnp"), &s.to_bytes())?;
        }
    }
    ctx.out.write_csv("tf_molecule", &t)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KsRecord {
    r_min: f64,
    z: f64,
    n: f64,
    energy: f64,
    kinetic: f64,
    external: f64,
    hartree: f64,
    xc: f64,
    homo: Option<f64>,
    orthonormality: f64,
    eigen_residual: f64,
    grid_h: f64,
    dims: [usize; 3],
    residual: f64,
    iterations: usize,
}

fn homo(eigenvalues: &[(f64, f64)]) -> Option<f64> {
    eigenvalues
        .iter()
        .filter(|(_, occ)| *occ > 0.0)
        .map(|(e, _)| *e)
        .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.max(e))))
}

pub fn ks_atom(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    cfg.require_charges(1)?;
    cfg.check_q()?;
    let xc = cfg.functional(ctx.strict)?;
    let opts = cfg.scf_options();
    let mut jobs = Vec::new();
    for &z in &cfg.charges {
        jobs.push((z, cfg.electrons_for(z)?));
        atom_grid(z).map_err(invalid)?;
    }
    let rows = ctx.par_map(&jobs, |&(z, n)| {
        let inputs = json!({ "z": z, "n": n, "q": cfg.q, "xc": ctx.xc_json(), "scf": scf_json(&opts) });
        let e = ctx.cache.get_or_solve("ks-atom", &inputs, || {
            let grid = Arc::new(atom_grid(z)?);
            let s = scf_atom(z, n, &xc, grid.clone(), cfg.q, &opts)?;
            let en = s.energy();
            let levels: Vec<(f64, f64)> = s.orbitals().iter().map(|o| (o.eigenvalue, o.occupation)).collect();
            Ok(Entry {
                scalars: KsRecord {
                    r_min: 0.0,
                    z,
                    n,
                    energy: s.total_energy(),
                    kinetic: en.kinetic,
                    external: en.external,
                    hartree: en.hartree,
                    xc: en.xc,
                    homo: homo(&levels),
                    orthonormality: s.orthonormality_defect(),
                    eigen_residual: s.max_eigen_residual(),
                    grid_h: grid.dt(),
                    dims: [grid.len(), 1, 1],
                    residual: last_residual(s.scf_history()),
                    iterations: s.scf_history().len(),
                },
                snapshot: None,
            })
        })?;
        Ok(e.scalars)
    })?;
    let mut t = Table::new(&[
        "z", "N", "xc", "q", "E", "kinetic", "external", "hartree", "xc_energy", "homo", "grid_h", "residual",
        "iterations",
    ]);
    for r in &rows {
        t.push(vec![
            r.z.into(),
            r.n.into(),
            cfg.xc.kind().name().into(),
            cfg.q.into(),
            r.energy.into(),
            r.kinetic.into(),
            r.external.into(),
            r.hartree.into(),
            r.xc.into(),
            r.homo.unwrap_or(f64::NAN).into(),
            r.grid_h.into(),
            r.residual.into(),
            r.iterations.into(),
        ]);
    }
    ctx.out.write_csv("ks_atom", &t)?;
    Ok(())
}

pub fn ks_molecule(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    cfg.check_q()?;
    cfg.check_grid()?;
    let xc = cfg.functional(ctx.strict)?;
    let config = cfg.configuration()?;
    let n = cfg.electrons_for(config.total_charge())?;
    let policies = cfg.ks_policies();
    check_ks_grids(std::slice::from_ref(&config), &policies)?;
    let opts = cfg.scf_options();
    let digest = config_digest(&config);
    let entries = ctx.par_map(&policies, |policy| {
        let inputs = json!({
            "config": config_json(&config),
            "n": n,
            "q": cfg.q,
            "policy": ks_policy_json(policy),
            "xc": ctx.xc_json(),
            "scf": scf_json(&opts),
        });
        ctx.cache.get_or_solve("ks-molecule", &inputs, || {
            let grid = Arc::new(ks_grid(&config, policy)?);
            let s = scf_molecule(&config, n, &xc, grid.clone(), cfg.q, &opts)?;
            let en = s.energy();
            let levels: Vec<(f64, f64)> = s.orbitals().iter().map(|o| (o.eigenvalue, o.occupation)).collect();
            Ok(Entry {
                scalars: KsRecord {
                    r_min: config.r_min(),
                    z: config.total_charge(),
                    n,
                    energy: s.total_energy(),
                    kinetic: en.kinetic,
                    external: en.external,
                    hartree: en.hartree,
                    xc: en.xc,
                    homo: homo(&levels),
                    orthonormality: s.orthonormality_defect(),
                    eigen_residual: s.max_eigen_residual(),
                    grid_h: grid.h(),
                    dims: grid.dims(),
                    residual: last_residual(s.scf_history()),
                    iterations: s.scf_history().len(),
                },
                snapshot: Some(Snapshot::from_grid_field(s.rho(), digest)),
            })
        })
    })?;
    let u = config.nuclear_repulsion();
    let mut t = Table::new(&[
        "level",
        "R_min",
        "Z",
        "N",
        "xc",
        "q",
        "E",
        "E_plus_U",
        "kinetic",
        "external",
        "hartree",
        "xc_energy",
        "homo",
        "orthonormality",
        "eigen_residual",
        "grid_h",
        "residual",
        "iterations",
    ]);
    for (level, e) in entries.iter().enumerate() {
        let r = &e.scalars;
        t.push(vec![
            level.into(),
            r.r_min.into(),
            r.z.into(),
            r.n.into(),
            cfg.xc.kind().name().into(),
            cfg.q.into(),
            r.energy.into(),
            (r.energy + u).into(),
            r.kinetic.into(),
            r.external.into(),
            r.hartree.into(),
            r.xc.into(),
            r.homo.unwrap_or(f64::NAN).into(),
            r.orthonormality.into(),
            r.eigen_residual.into(),
            r.grid_h.into(),
            r.residual.into(),
            r.iterations.into(),
        ]);
        if let Some(s) = &e.snapshot {
            ctx.out.write_bytes(&format!("ks_molecule_rho_{level}.fsnp"), &s.to_bytes())?;
        }
    }
    ctx.out.write_csv("ks_molecule", &t)?;
    Ok(())
}

fn sweep_shape(cfg: &RunConfig) -> Result<NuclearConfiguration, CliError> {
    let mut c = cfg.clone();
    if c.positions.is_none() && c.distance.is_none() {
        c.distance = Some(1.0);
    }
    let shape = c.configuration()?;
    if shape.len() < 2 {
        return Err(CliError::Config("a sweep needs at least two nuclei".into()));
    }
    Ok(shape)
}

pub fn bo_scan(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    cfg.check_grid()?;
    let shape = sweep_shape(cfg)?;
    let r_values = cfg
        .r_values
        .clone()
        .ok_or_else(|| CliError::Config("bo-scan needs r_values".into()))?;
    increasing("r_values", &r_values)?;
    let configs = r_values
        .iter()
        .map(|&r| at_distance(&shape, r).map_err(invalid))
        .collect::<Result<Vec<_>, _>>()?;
    let levels = cfg.grid.refinements + 1;
    let jobs: Vec<(usize, usize)> = (0..levels).flat_map(|l| (0..configs.len()).map(move |i| (l, i))).collect();
    let (theory, xc_name, points) = match cfg.theory {
        TheoryTag::Tf => {
            require_tf_q(cfg)?;
            let policies = cfg.tf_policies();
            check_tf_grids(&configs, &policies)?;
            let pts = ctx.par_map(&jobs, |&(l, i)| tf_point(ctx, &configs[i], &policies[l]))?;
            (Theory::Tf, "none".to_string(), pts)
        }
        TheoryTag::Ks => {
            cfg.check_q()?;
            let xc = cfg.functional(ctx.strict)?;
            let policies = cfg.ks_policies();
            check_ks_grids(&configs, &policies)?;
            let pts = ctx.par_map(&jobs, |&(l, i)| ks_point(ctx, &configs[i], &xc, &policies[l]))?;
            (Theory::Ks, cfg.xc.kind().name(), pts)
        }
    };
    let mut t = Table::new(&[
        "R_min", "theory", "xc", "q", "D", "grid_h", "residual", "E_mol", "E_atoms", "U_R",
    ]);
    for p in &points {
        t.push(vec![
            p.r_min.into(),
            theory.name().into(),
            xc_name.clone().into(),
            cfg.q.into(),
            p.d.into(),
            p.grid_h.into(),
            p.residual.into(),
            p.e_mol.into(),
            p.e_atoms.into(),
            p.u_r.into(),
        ]);
    }
    ctx.out.write_csv("bo_scan", &t)?;
    let fits: Vec<Value> = points
        .chunks(configs.len())
        .enumerate()
        .map(|(level, chunk)| {
            let curve = BOCurve::new(shape.clone(), theory, chunk.iter().map(BoPoint::from).collect());
            json!({
                "level": level,
                "spacing": chunk.iter().map(|p| p.grid_h).collect::<Vec<_>>(),
                "fit": curve.fit.map(FitRecord::from),
                "all_positive": chunk.iter().all(|p| p.d > 0.0),
            })
        })
        .collect();
    ctx.out.write_json(
        "bo_scan_fit",
        &json!({ "theory": theory.name(), "xc": xc_name, "q": cfg.q, "levels": fits }),
    )?;
    Ok(())
}

pub fn gamma(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    require_tf_q(cfg)?;
    cfg.check_grid()?;
    let shape = sweep_shape(cfg)?;
    let l_values = cfg
        .l_values
        .clone()
        .ok_or_else(|| CliError::Config("gamma needs l_values".into()))?;
    if l_values.len() < 3 {
        return Err(CliError::Config("gamma needs at least three l_values".into()));
    }
    increasing("l_values", &l_values)?;
    let configs = l_values
        .iter()
        .map(|&l| shape.stretched(l).map_err(invalid))
        .collect::<Result<Vec<_>, _>>()?;
    let policies = cfg.tf_policies();
    check_tf_grids(&configs, &policies)?;
    let jobs: Vec<(usize, usize)> = (0..policies.len())
        .flat_map(|l| (0..configs.len()).map(move |i| (l, i)))
        .collect();
    let points = ctx.par_map(&jobs, |&(l, i)| tf_point(ctx, &configs[i], &policies[l]))?;
    let mut t = Table::new(&["level", "l", "R_min", "D", "l7_D", "grid_h", "residual"]);
    for (&(level, i), p) in jobs.iter().zip(&points) {
        let l = l_values[i];
        t.push(vec![
            level.into(),
            l.into(),
            p.r_min.into(),
            p.d.into(),
            (l.powi(7) * p.d).into(),
            p.grid_h.into(),
            p.residual.into(),
        ]);
    }
    ctx.out.write_csv("gamma", &t)?;
    let mut levels = Vec::new();
    let mut failure = None;
    for (level, chunk) in points.chunks(configs.len()).enumerate() {
        match gamma_from_points(&l_values, chunk.iter().map(BoPoint::from).collect()) {
            Ok(g) => levels.push(json!({
                "level": level,
                "gamma": g.gamma,
                "error": g.error,
                "rate": g.rate,
                "scaled": g.scaled,
            })),
            Err(e) => {
                levels.push(json!({ "level": level, "failure": e.to_string() }));
                failure.get_or_insert(e);
            }
        }
    }
    ctx.out.write_json("gamma", &json!({ "unit_config": config_json(&shape), "levels": levels }))?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScreenedRecord {
    r: Vec<f64>,
    diff_sup: Vec<f64>,
    phi_sup: Vec<f64>,
    per_nucleus: Vec<Vec<f64>>,
    fit: Option<FitRecord>,
    phi_r4_max: f64,
    ks_h: f64,
    tf_h: f64,
    ks_residual: f64,
    tf_residual: f64,
}

pub fn screened(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    require_tf_q(cfg)?;
    cfg.check_grid()?;
    let xc = cfg.functional(ctx.strict)?;
    let config = cfg.configuration()?;
    if config.len() < 2 {
        return Err(CliError::Config("screened needs at least two nuclei".into()));
    }
    let radii = cfg
        .radii
        .clone()
        .ok_or_else(|| CliError::Config("screened needs radii".into()))?;
    increasing("radii", &radii)?;
    if radii.iter().any(|&r| r > 0.25 * config.r_min()) {
        return Err(CliError::Config(format!(
            "radii must not exceed R_min/4 = {}",
            0.25 * config.r_min()
        )));
    }
    if cfg.samples < fermisurf::tf_molecule::MIN_SPHERE_SAMPLES {
        return Err(CliError::Config("too few sphere samples".into()));
    }
    let tf_policies = cfg.tf_policies();
    let ks_policies: Vec<KsGridPolicy> = {
        let d = KsGridPolicy::default();
        let h = cfg.grid.ks_spacing.unwrap_or(d.h);
        (0..=cfg.grid.refinements)
            .map(|k| KsGridPolicy {
                h: h / f64::powi(2.0, k as i32),
                ..d
            })
            .collect()
    };
    check_tf_grids(std::slice::from_ref(&config), &tf_policies)?;
    check_ks_grids(std::slice::from_ref(&config), &ks_policies)?;
    let tf_opts = cfg.tf_options();
    let scf = cfg.scf_options();
    let levels: Vec<usize> = (0..tf_policies.len()).collect();
    let records = ctx.par_map(&levels, |&level| {
        let inputs = json!({
            "config": config_json(&config),
            "radii": radii,
            "samples": cfg.samples,
            "tf_policy": tf_policy_json(&tf_policies[level]),
            "ks_policy": ks_policy_json(&ks_policies[level]),
            "tf": tf_opts_json(&tf_opts),
            "scf": scf_json(&scf),
            "xc": ctx.xc_json(),
            "q": cfg.q,
            "universal": ctx.universal_json(),
        });
        let e = ctx.cache.get_or_solve("screened", &inputs, || {
            let kg = Arc::new(ks_grid(&config, &ks_policies[level])?);
            let ks = scf_molecule(&config, config.total_charge(), &xc, kg.clone(), cfg.q, &scf)?;
            let tg = Arc::new(tf_grid(&config, &tf_policies[level])?);
            let tf = solve_tf(&config, config.total_charge(), tg.clone(), ctx.universal()?, &tf_opts)?;
            let prof = screened_compare(&ks, &tf, &radii, cfg.samples)?;
            Ok(Entry {
                scalars: ScreenedRecord {
                    phi_r4_max: prof.phi_r4_max(),
                    r: prof.r,
                    diff_sup: prof.diff_sup,
                    phi_sup: prof.phi_sup,
                    per_nucleus: prof.per_nucleus,
                    fit: prof.fit.map(FitRecord::from),
                    ks_h: kg.h(),
                    tf_h: tg.h(),
                    ks_residual: last_residual(ks.scf_history()),
                    tf_residual: tf.residual(),
                },
                snapshot: None,
            })
        })?;
        Ok(e.scalars)
    })?;
    let k = config.len();
    let mut header = vec!["level", "r", "diff_sup", "phi_sup", "phi_r4"];
    let names: Vec<String> = (1..=k).map(|j| format!("phi_sup_{j}")).collect();
    header.extend(names.iter().map(String::as_str));
    header.extend(["grid_h", "tf_grid_h", "residual", "tf_residual"]);
    let mut t = Table::new(&header);
    for (level, rec) in records.iter().enumerate() {
        for (i, &r) in rec.r.iter().enumerate() {
            let mut row: Vec<Cell> = vec![
                level.into(),
                r.into(),
                rec.diff_sup[i].into(),
                rec.phi_sup[i].into(),
                (rec.phi_sup[i] * r.powi(4)).into(),
            ];
            row.extend(rec.per_nucleus[i].iter().map(|&v| Cell::from(v)));
            row.extend([
                rec.ks_h.into(),
                rec.tf_h.into(),
                rec.ks_residual.into(),
                rec.tf_residual.into(),
            ]);
            t.push(row);
        }
    }
    ctx.out.write_csv("screened", &t)?;
    let summary: Vec<Value> = records
        .iter()
        .enumerate()
        .map(|(level, r)| json!({ "level": level, "fit": r.fit, "phi_r4_max": r.phi_r4_max }))
        .collect();
    ctx.out.write_json("screened", &json!({ "levels": summary }))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OutsideRecord {
    r: f64,
    q: Vec<Vec<f64>>,
    d_tf: f64,
    e_outside: f64,
    e_atoms: Vec<f64>,
    gap: f64,
    gap_r7: f64,
    mu: f64,
    grid_h: f64,
    residual: f64,
}

pub fn qij(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    require_tf_q(cfg)?;
    cfg.check_grid()?;
    let config = cfg.configuration()?;
    if config.len() < 2 {
        return Err(CliError::Config("qij needs at least two nuclei".into()));
    }
    let radii = cfg
        .radii
        .clone()
        .ok_or_else(|| CliError::Config("qij needs radii".into()))?;
    increasing("radii", &radii)?;
    if radii.iter().any(|&r| r > 0.5 * config.r_min()) {
        return Err(CliError::Config(format!(
            "radii must not exceed R_min/2 = {}",
            0.5 * config.r_min()
        )));
    }
    if cfg.samples < fermisurf::tf_molecule::MIN_SPHERE_SAMPLES {
        return Err(CliError::Config("too few sphere samples".into()));
    }
    let policies = cfg.tf_policies();
    check_tf_grids(std::slice::from_ref(&config), &policies)?;
    let opts = cfg.tf_options();
    let jobs: Vec<(usize, f64)> = (0..policies.len())
        .flat_map(|l| radii.iter().map(move |&r| (l, r)))
        .collect();
    let records = ctx.par_map(&jobs, |&(level, r)| {
        let inputs = json!({
            "config": config_json(&config),
            "r": r,
            "samples": cfg.samples,
            "policy": tf_policy_json(&policies[level]),
            "tf": tf_opts_json(&opts),
            "universal": ctx.universal_json(),
        });
        let e = ctx.cache.get_or_solve("outside", &inputs, || {
            let u = ctx.universal()?;
            let atoms = AtomSet::new(&config, u.clone())?;
            let q = qij_tf(&atoms, &config, r)?;
            let rep = outside_decomposition_check(&config, r, &policies[level], u, &opts, cfg.samples)?;
            Ok(Entry {
                scalars: OutsideRecord {
                    r,
                    q,
                    d_tf: rep.d_tf,
                    e_outside: rep.e_outside,
                    e_atoms: rep.e_atoms,
                    gap: rep.gap,
                    gap_r7: rep.gap_r7,
                    mu: rep.mu,
                    grid_h: rep.grid_h,
                    residual: rep.residual,
                },
                snapshot: None,
            })
        })?;
        Ok(e.scalars)
    })?;
    let mut t = Table::new(&[
        "level", "r", "i", "j", "Q_ij", "D_TF", "E_outside", "gap", "gap_r7", "grid_h", "residual",
    ]);
    let mut summary = Vec::new();
    for (&(level, _), rec) in jobs.iter().zip(&records) {
        let mut asym = 0.0f64;
        for (i, row) in rec.q.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                asym = asym.max((v - rec.q[j][i]).abs());
                t.push(vec![
                    level.into(),
                    rec.r.into(),
                    (i + 1).into(),
                    (j + 1).into(),
                    v.into(),
                    rec.d_tf.into(),
                    rec.e_outside.into(),
                    rec.gap.into(),
                    rec.gap_r7.into(),
                    rec.grid_h.into(),
                    rec.residual.into(),
                ]);
            }
        }
        summary.push(json!({
            "level": level,
            "r": rec.r,
            "gap": rec.gap,
            "gap_r7": rec.gap_r7,
            "mu": rec.mu,
            "e_atoms": rec.e_atoms,
            "symmetry_defect": asym,
        }));
    }
    ctx.out.write_csv("qij", &t)?;
    ctx.out.write_json("qij", &json!({ "radii": summary }))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SplitRecord {
    e_whole: f64,
    e_parts: Vec<f64>,
    margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SearchRecord {
    positions: Vec<[f64; 3]>,
    r_m: f64,
    energy: f64,
    grid_h: f64,
    residual: f64,
    evaluations: usize,
    stagnated: bool,
    history: Vec<(f64, f64)>,
    split: Option<SplitRecord>,
}

pub fn minsearch(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    cfg.require_charges(2)?;
    cfg.check_q()?;
    cfg.check_grid()?;
    if cfg.grid.refinements > 0 {
        return Err(CliError::Config("minsearch runs on a single grid level".into()));
    }
    let xc = cfg.functional(ctx.strict)?;
    let search = cfg.search_options();
    if !(search.r_init > 0.0 && search.r_max > search.r_init) {
        return Err(CliError::Config("search needs 0 < r_init < r_max".into()));
    }
    if let Some(split) = &cfg.split {
        let k = cfg.charges.len();
        let mut seen = vec![false; k];
        for &i in split {
            if i >= k || std::mem::replace(&mut seen[i], true) {
                return Err(CliError::Config(format!("split index {i} is out of range or repeated")));
            }
        }
        if split.is_empty() || split.len() == k {
            return Err(CliError::Config("split must be a proper nonempty subset of the nuclei".into()));
        }
    }
    let policy = cfg.ks_policies()[0];
    let probe = NuclearConfiguration::diatomic(cfg.charges[0], cfg.charges[1], search.r_max).map_err(invalid)?;
    ks_grid(&probe, &policy).map_err(invalid)?;
    let scf = cfg.scf_options();
    let inputs = json!({
        "charges": cfg.charges,
        "policy": ks_policy_json(&policy),
        "scf": scf_json(&scf),
        "xc": ctx.xc_json(),
        "q": cfg.q,
        "search": {
            "r_init": search.r_init,
            "r_max": search.r_max,
            "step": search.step,
            "restarts": search.restarts,
            "max_evals": search.max_evals,
            "seed": search.seed,
        },
        "split": cfg.split,
    });
    let rec = ctx
        .cache
        .get_or_solve("minsearch", &inputs, || {
            let res = min_distance_search(&cfg.charges, &xc, &policy, cfg.q, &scf, &search, cfg.split.as_deref())?;
            Ok(Entry {
                scalars: SearchRecord {
                    positions: res.config.positions().to_vec(),
                    r_m: res.r_m,
                    energy: res.energy,
                    grid_h: res.grid_h,
                    residual: res.residual,
                    evaluations: res.evaluations,
                    stagnated: res.stagnated,
                    history: res.history,
                    split: res.split.map(|s| SplitRecord {
                        e_whole: s.e_whole,
                        e_parts: s.e_parts,
                        margin: s.margin,
                    }),
                },
                snapshot: None,
            })
        })?
        .scalars;
    let mut t = Table::new(&[
        "R_M", "E_mol", "evaluations", "stagnated", "split_margin", "grid_h", "residual",
    ]);
    t.push(vec![
        rec.r_m.into(),
        rec.energy.into(),
        rec.evaluations.into(),
        rec.stagnated.to_string().into(),
        rec.split.as_ref().map_or(f64::NAN, |s| s.margin).into(),
        rec.grid_h.into(),
        rec.residual.into(),
    ]);
    ctx.out.write_csv("minsearch", &t)?;
    ctx.out.write_json("minsearch", &serde_json::to_value(&rec).map_err(|e| CliError::Io(e.to_string()))?)?;
    Ok(())
}
