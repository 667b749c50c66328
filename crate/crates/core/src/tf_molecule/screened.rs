//! Screened potentials `Φ_r = V_R − (ρ 1_{A_r^c}) ⋆ |x|^{-1}`.
//!
//! For TF densities the singular atomic part inside each ball is handled by
//! the radial profiles, so `Φ_r = Σ_j Φ_{j,r} − P[(ρ − ρ_j) 1_{B_j}]` with
//! only the smooth remainder going through the grid Poisson solver. For
//! grid densities the ball charges enter through their multipoles up to
//! quadrupole order, collected from sub-cell points.

use std::sync::Arc;

use super::atoms::AtomSet;
use super::config::{NuclearConfiguration, RegionMask};
use super::solve::TFSolution;
use crate::error::{contract, Result};
use crate::numerics::grid3d::{dist, Grid3D};
use crate::numerics::poisson::poisson_solve;
use crate::numerics::sphere::sphere_sup;
use crate::numerics::{FieldKind, GridField};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct ScreenedPotential<T: Real> {
    config: NuclearConfiguration<T>,
    atoms: Option<Arc<AtomSet<T>>>,
    radius: T,
    samples: usize,
    smooth: GridField<T>,
    /// Ball charges of a grid density as multipoles about each nucleus.
    balls: Vec<Multipole<T>>,
}

/// Charge, dipole and traceless quadrupole about `center`.
#[derive(Debug, Clone)]
struct Multipole<T> {
    center: [T; 3],
    charge: T,
    dipole: [T; 3],
    quadrupole: [[T; 3]; 3],
}

impl<T: Real> Multipole<T> {
    fn from_points(center: [T; 3], points: &[([T; 3], T)]) -> Self {
        let mut m = Self {
            center,
            charge: T::zero(),
            dipole: [T::zero(); 3],
            quadrupole: [[T::zero(); 3]; 3],
        };
        for &(y, q) in points {
            let d = [y[0] - center[0], y[1] - center[1], y[2] - center[2]];
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            m.charge += q;
            for a in 0..3 {
                m.dipole[a] += q * d[a];
                for b in 0..3 {
                    let delta = if a == b { r2 } else { T::zero() };
                    m.quadrupole[a][b] += q * (T::lit(3.0) * d[a] * d[b] - delta);
                }
            }
        }
        m
    }

    /// Exterior potential, valid outside the sphere holding the charge.
    fn potential(&self, x: [T; 3]) -> T {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let r = dist(x, self.center).max(T::epsilon());
        let n = [d[0] / r, d[1] / r, d[2] / r];
        let mut dip = T::zero();
        let mut quad = T::zero();
        for a in 0..3 {
            dip += self.dipole[a] * n[a];
            for b in 0..3 {
                quad += self.quadrupole[a][b] * n[a] * n[b];
            }
        }
        self.charge / r + dip / (r * r) + T::lit(0.5) * quad / (r * r * r)
    }
}

impl<T: Real> ScreenedPotential<T> {
    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn grid(&self) -> &Arc<Grid3D<T>> {
        self.smooth.grid()
    }

    /// `Φ_r(x)`, off the nuclei.
    pub fn at(&self, x: [T; 3]) -> T {
        let mut v = T::zero();
        for (j, (&p, &z)) in self.config.positions().iter().zip(self.config.charges()).enumerate() {
            let s = dist(x, p).max(T::epsilon());
            v += match &self.atoms {
                Some(a) => a.atom(j).screened_at(s, self.radius),
                None => z / s,
            };
        }
        let balls: T = self.balls.iter().map(|m| m.potential(x)).sum();
        v - balls
            - self
                .smooth
                .grid()
                .trilinear(self.smooth.values(), x)
                .unwrap_or(T::zero())
    }

    /// `Φ_r` at the grid nodes.
    pub fn field(&self) -> Result<GridField<T>> {
        let g = self.grid().clone();
        let vals = (0..g.len()).map(|i| self.at(g.point_of(i))).collect();
        GridField::new(g, vals, FieldKind::Potential)
    }

    /// `sup_{∂B(R_j, r)} |Φ_r|` for every nucleus.
    pub fn sphere_sups(&self) -> Vec<T> {
        self.config
            .positions()
            .iter()
            .map(|&c| sphere_sup(c, self.radius, self.samples, |x| self.at(x)))
            .collect()
    }

    /// `sup_{∂A_r} |f − Φ_r|` over the sampled spheres.
    pub fn sup_difference(&self, other: &Self) -> T {
        self.config
            .positions()
            .iter()
            .map(|&c| sphere_sup(c, self.radius, self.samples, |x| self.at(x) - other.at(x)))
            .fold(T::zero(), T::max)
    }
}

fn check_mask<T: Real>(config: &NuclearConfiguration<T>, mask: &RegionMask<T>) -> Result<()> {
    if mask.centers() != config.positions() {
        return Err(contract("region mask was built for a different configuration"));
    }
    if config.len() > 1 && mask.radius() > T::lit(0.5) * config.r_min() {
        return Err(contract("screening radius exceeds half the smallest internuclear distance"));
    }
    Ok(())
}

/// `Φ^TF_r` for a molecular TF solution.
pub fn screened_tf<T: Real>(sol: &TFSolution<T>, mask: &RegionMask<T>) -> Result<ScreenedPotential<T>> {
    let config = sol.config();
    check_mask(config, mask)?;
    let grid = sol.grid().clone();
    let rho = sol.rho().values();
    let atoms = sol.atoms().clone();
    let mut src = vec![T::zero(); grid.len()];
    for (j, &c) in config.positions().iter().enumerate() {
        let a = atoms.atom(j);
        for (i, f) in mask.ball_weights(&grid, j) {
            let s = dist(grid.point_of(i), c).max(grid.h() * T::lit(1e-9));
            src[i] += f * (rho[i] - a.rho_at(s));
        }
    }
    let smooth = poisson_solve(&grid, &src);
    Ok(ScreenedPotential {
        config: config.clone(),
        atoms: Some(atoms),
        radius: mask.radius(),
        samples: mask.samples(),
        smooth: GridField::new(grid, smooth, FieldKind::Potential)?,
        balls: Vec::new(),
    })
}

/// Sub-cell points per axis when collecting ball multipoles.
const DIRECT_SUBSAMPLES: usize = 6;

/// `Φ_r` for a bounded grid density such as a Kohn–Sham `ρ₀`.
pub fn screened_density<T: Real>(
    config: &NuclearConfiguration<T>,
    rho: &GridField<T>,
    mask: &RegionMask<T>,
) -> Result<ScreenedPotential<T>> {
    check_mask(config, mask)?;
    let grid = rho.grid().clone();
    let h = grid.h();
    let n = DIRECT_SUBSAMPLES;
    let sub = h / T::from_usize_lossy(n);
    let dv = sub * sub * sub;
    let r = mask.radius();
    let mut balls = Vec::with_capacity(config.len());
    for (j, &c) in config.positions().iter().enumerate() {
        let mut pieces = Vec::new();
        for (i, _) in mask.ball_weights(&grid, j) {
            let q = rho.values()[i] * dv;
            if q == T::zero() {
                continue;
            }
            let p = grid.point_of(i);
            for a in 0..n {
                for b in 0..n {
                    for e in 0..n {
                        let off = |k: usize| (T::from_usize_lossy(k) + T::lit(0.5)) * sub - T::lit(0.5) * h;
                        let y = [p[0] + off(a), p[1] + off(b), p[2] + off(e)];
                        if dist(y, c) < r {
                            pieces.push((y, q));
                        }
                    }
                }
            }
        }
        balls.push(Multipole::from_points(c, &pieces));
    }
    Ok(ScreenedPotential {
        config: config.clone(),
        atoms: None,
        radius: r,
        samples: mask.samples(),
        smooth: GridField::zeros(grid, FieldKind::Potential),
        balls,
    })
}
