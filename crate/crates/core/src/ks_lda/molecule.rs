//! Kohn–Sham molecules on a Cartesian grid.
//!
//! The nuclear attraction at each node is the exact average of `z/|x − R|`
//! over the node's cell, which keeps the cusp integrable without
//! pseudopotentials. Orbitals vanish on the box faces.

use std::sync::Arc;

use super::mixing::Anderson;
use super::options::ScfOptions;
use super::state::{aufbau, EnergyTerms, KSState, Orbital};
use super::xc::XcFunctional;
use crate::error::{contract, Error, Result};
use crate::numerics::cube::cell_average_inv_r;
use crate::numerics::eigen::{lowest_eigenpairs, EigenOptions};
use crate::numerics::grid3d::{dist, Anchor, Grid3D};
use crate::numerics::poisson::{dot, neg_laplacian_interior, poisson_solve};
use crate::numerics::{FieldKind, GridField};
use crate::real::Real;
use crate::tf_molecule::NuclearConfiguration;

/// Layout of a KS grid around a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsGridPolicy<T> {
    /// Target spacing; shrunk so that the first two nuclei are a whole
    /// number of steps apart.
    pub h: T,
    /// Absolute box margin around the nuclei.
    pub margin: T,
    pub max_points: usize,
}

impl<T: Real> Default for KsGridPolicy<T> {
    fn default() -> Self {
        Self {
            h: T::lit(0.25),
            margin: T::lit(5.0),
            max_points: 2_000_000,
        }
    }
}

/// Grid with nucleus 1 on a node and, for two or more nuclei, nucleus 2 on
/// a node as well.
pub fn ks_grid<T: Real>(config: &NuclearConfiguration<T>, policy: &KsGridPolicy<T>) -> Result<Grid3D<T>> {
    if !(policy.h > T::zero()) || !(policy.margin > T::zero()) {
        return Err(contract("grid policy needs positive spacing and margin"));
    }
    let mut h = policy.h;
    if config.len() >= 2 {
        let d = dist(config.positions()[0], config.positions()[1]);
        let steps = (d / h - T::lit(1e-9)).ceil().max(T::one());
        h = d / steps;
    }
    Grid3D::enclosing(config.positions(), policy.margin, h, Anchor::Node, policy.max_points)
}

/// Cell-averaged `V_R` at every node.
pub fn cell_averaged_potential<T: Real>(grid: &Grid3D<T>, config: &NuclearConfiguration<T>) -> Vec<T> {
    let h = grid.h();
    (0..grid.len())
        .map(|i| {
            let p = grid.point_of(i);
            config
                .positions()
                .iter()
                .zip(config.charges())
                .map(|(&c, &z)| z * cell_average_inv_r(p, h, c))
                .sum()
        })
        .collect()
}

/// Self-consistent KS ground state of `n` electrons in the field of
/// `config`, with Anderson density mixing and aufbau occupations.
pub fn scf_molecule<T: Real>(
    config: &NuclearConfiguration<T>,
    n: T,
    xc: &XcFunctional<T>,
    grid: Arc<Grid3D<T>>,
    q: T,
    opts: &ScfOptions<T>,
) -> Result<KSState<T, Grid3D<T>>> {
    if n < T::zero() || n > config.total_charge() {
        return Err(contract(format!(
            "electron number {n} outside [0, {}]",
            config.total_charge()
        )));
    }
    if !(q > T::zero()) {
        return Err(contract("spin degeneracy must be positive"));
    }
    let g = &*grid;
    let dv = g.cell_volume();
    if n == T::zero() {
        return Ok(KSState {
            q,
            electrons: n,
            orbitals: Vec::new(),
            rho: GridField::zeros(grid.clone(), FieldKind::Density),
            energy: EnergyTerms::zero(),
            history: Vec::new(),
            orthonormality: T::zero(),
            max_eigen_residual: T::zero(),
        });
    }
    let v_nuc = cell_averaged_potential(g, config);
    let m = g.interior_dims();
    let h = g.h();
    let lap = g.laplacian();
    let nint = g.interior_len();
    let occupied = (n / q).ceil().to_usize().unwrap_or(1).max(1);
    let k = (occupied + opts.extra_states).min(nint);
    let mut mixer = Anderson::new(opts.depth, opts.mixing, vec![dv; g.len()]);
    let mut rho_in = vec![T::zero(); g.len()];
    let mut start: Option<Vec<Vec<T>>> = None;
    let mut history = Vec::new();
    let mut last_res = T::one();
    for _ in 0..opts.max_iter {
        let vh = poisson_solve(g, &rho_in);
        let v_eff: Vec<T> = (0..g.len())
            .map(|i| -v_nuc[i] + vh[i] - xc.dg(rho_in[i]))
            .collect();
        let v_int = g.gather_interior(&v_eff);
        let tol = opts
            .eigen_tol
            .max((T::lit(1e-2) * last_res).min(T::lit(1e-3)));
        let eopts = EigenOptions {
            tol,
            max_iter: 400,
            guard: 2,
            seed: opts.seed,
        };
        let shift = T::one();
        let pairs = lowest_eigenpairs(
            nint,
            k,
            |x, out| {
                neg_laplacian_interior(m, h, x, out);
                for ((o, &xi), &v) in out.iter_mut().zip(x).zip(&v_int) {
                    *o = T::lit(0.5) * *o + v * xi;
                }
            },
            |r, z| {
                z.copy_from_slice(r);
                lap.solve_shifted(z, T::lit(0.5), shift);
            },
            start.as_deref(),
            &eopts,
        )?;
        // Box states above zero may carry charge while iterating; the
        // converged state must occupy bound levels only.
        let levels: Vec<(T, usize)> = pairs.values.iter().map(|&e| (e, 1)).collect();
        let occ = aufbau(&levels, n, q)?;
        let mut rho_out = vec![T::zero(); g.len()];
        let mut kinetic = T::zero();
        let mut max_res = T::zero();
        let mut orbitals = Vec::with_capacity(k);
        for (idx, (vec, &eps)) in pairs.vectors.iter().zip(&pairs.values).enumerate() {
            let o = occ.get(idx).copied().unwrap_or(T::zero());
            let mut full = vec![T::zero(); g.len()];
            let scaled: Vec<T> = vec.iter().map(|&x| x / dv.sqrt()).collect();
            g.scatter_interior(&scaled, &mut full);
            if o > T::zero() {
                for (r, &f) in rho_out.iter_mut().zip(&full) {
                    *r += o * f * f;
                }
                let pot: T = vec.iter().zip(&v_int).map(|(&x, &v)| x * x * v).sum();
                kinetic += o * (eps - pot);
                max_res = max_res.max(pairs.residuals[idx]);
            }
            orbitals.push(Orbital {
                eigenvalue: eps,
                occupation: o,
                angular: None,
                values: full,
            });
        }
        let res = rho_out
            .iter()
            .zip(&rho_in)
            .map(|(&a, &b)| (a - b).mag())
            .sum::<T>()
            * dv
            / n;
        history.push(res.f64());
        start = Some(pairs.vectors.clone());
        if res <= opts.density_tol && tol <= opts.eigen_tol {
            if let Some(top) = occ
                .iter()
                .zip(&pairs.values)
                .filter(|(&o, _)| o > T::zero())
                .map(|(_, &e)| e)
                .find(|&e| e >= T::zero())
            {
                return Err(Error::Unbound(format!(
                    "occupied level at {top} is not bound for {n} electrons"
                )));
            }
            let external = -dot(&v_nuc, &rho_out) * dv;
            let vh_out = poisson_solve(g, &rho_out);
            let hartree = T::lit(0.5) * dot(&vh_out, &rho_out) * dv;
            let xc_e = rho_out.iter().map(|&p| xc.g(p)).sum::<T>() * dv;
            let ortho = orthonormality(&pairs.vectors);
            return Ok(KSState {
                q,
                electrons: n,
                orbitals,
                rho: GridField::new(grid.clone(), rho_out, FieldKind::Density)?,
                energy: EnergyTerms::new(kinetic, external, hartree, xc_e),
                history,
                orthonormality: ortho,
                max_eigen_residual: max_res,
            });
        }
        last_res = res;
        rho_in = mixer.next(&rho_in, &rho_out);
        let charge = rho_in.iter().copied().sum::<T>() * dv;
        if charge > n {
            let s = n / charge;
            rho_in.iter_mut().for_each(|r| *r *= s);
        }
    }
    let last = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NoConvergence {
        solver: "ks-molecule",
        iterations: opts.max_iter,
        residual: last,
        history,
    })
}

fn orthonormality<T: Real>(vs: &[Vec<T>]) -> T {
    let mut worst = T::zero();
    for i in 0..vs.len() {
        for j in i..vs.len() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((dot(&vs[i], &vs[j]) - target).mag());
        }
    }
    worst
}
