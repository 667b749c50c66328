//! Molecular TF ground states on a Cartesian grid.
//!
//! The unknown is the difference `u = w − Σ_j w_j` between the molecular
//! electron potential and the sum of neutral atomic ones, so the nuclear
//! cusps are carried analytically by the atomic profiles and the grid only
//! resolves the overlap correction.

use std::sync::Arc;

use super::atoms::AtomSet;
use super::config::NuclearConfiguration;
use super::farfield::FarField;
use super::newton::{Problem, TfOptions};
use crate::constants::{tf_density, tf_kinetic};
use crate::error::{contract, Result};
use crate::numerics::poisson::set_boundary;
use crate::numerics::grid3d::{dist, Anchor, Grid3D};
use crate::numerics::{FieldKind, GridField};
use crate::real::Real;
use crate::tf_atom::UniversalTF;

/// How a Cartesian grid is laid out around a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy<T> {
    /// Target spacing; shrunk so that the first two nuclei are a whole
    /// number of steps apart.
    pub h: T,
    /// Box margin in units of `z_min^{-1/3}`.
    pub margin_factor: T,
    pub max_points: usize,
}

impl<T: Real> Default for GridPolicy<T> {
    fn default() -> Self {
        Self {
            h: T::lit(0.1),
            margin_factor: T::lit(6.0),
            max_points: 160 * 160 * 160,
        }
    }
}

/// Grid with nucleus 1 at a cell center and the margin rule applied.
pub fn tf_grid<T: Real>(config: &NuclearConfiguration<T>, policy: &GridPolicy<T>) -> Result<Grid3D<T>> {
    if !(policy.h > T::zero()) || !(policy.margin_factor > T::zero()) {
        return Err(contract("grid policy needs positive spacing and margin"));
    }
    let mut h = policy.h;
    if config.len() >= 2 {
        let d = dist(config.positions()[0], config.positions()[1]);
        let steps = (d / h - T::lit(1e-9)).ceil().max(T::one());
        h = d / steps;
    }
    let margin = policy.margin_factor * config.z_min().powf(-T::lit(1.0 / 3.0));
    Grid3D::enclosing(config.positions(), margin, h, Anchor::CellCenter, policy.max_points)
}

/// Superposed neutral-atom fields at every node.
pub(crate) struct Superposition<T> {
    pub phi: Vec<T>,
    pub rho: Vec<T>,
    pub kinetic: Vec<T>,
}

pub(crate) fn superpose<T: Real>(
    grid: &Grid3D<T>,
    config: &NuclearConfiguration<T>,
    atoms: &AtomSet<T>,
) -> Superposition<T> {
    let n = grid.len();
    let two = T::lit(2.0);
    let ck = tf_kinetic(two);
    let floor = grid.h() * T::lit(1e-9);
    let mut phi = vec![T::zero(); n];
    let mut rho = vec![T::zero(); n];
    let mut kinetic = vec![T::zero(); n];
    for (idx, ((p, r), k)) in phi.iter_mut().zip(rho.iter_mut()).zip(kinetic.iter_mut()).enumerate() {
        let x = grid.point_of(idx);
        for (j, &c) in config.positions().iter().enumerate() {
            let a = atoms.atom(j);
            let d = dist(x, c).max(floor);
            let pj = a.phi_at(d);
            let rj = tf_density(pj, two);
            *p += pj;
            *r += rj;
            *k += ck * rj * rj.cbrt() * rj.cbrt();
        }
    }
    Superposition { phi, rho, kinetic }
}

#[derive(Debug, Clone)]
pub struct TFSolution<T: Real> {
    config: NuclearConfiguration<T>,
    atoms: Arc<AtomSet<T>>,
    rho: GridField<T>,
    phi: GridField<T>,
    overlap_potential: Vec<T>,
    mu: T,
    energy: T,
    atom_energy: T,
    residual: T,
    iterations: usize,
    history: Vec<f64>,
}

impl<T: Real> TFSolution<T> {
    pub fn config(&self) -> &NuclearConfiguration<T> {
        &self.config
    }

    pub fn atoms(&self) -> &Arc<AtomSet<T>> {
        &self.atoms
    }

    pub fn grid(&self) -> &Arc<Grid3D<T>> {
        self.rho.grid()
    }

    /// `ρ^TF` at the nodes.
    pub fn rho(&self) -> &GridField<T> {
        &self.rho
    }

    /// `φ^TF = V_R − ρ^TF ⋆ |x|^{-1}` at the nodes.
    pub fn phi(&self) -> &GridField<T> {
        &self.phi
    }

    /// `Σ_j φ_{z_j} − φ^TF`, the grid unknown.
    pub fn overlap_potential(&self) -> &[T] {
        &self.overlap_potential
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// `E^TF_{V_R}(n)`.
    pub fn energy(&self) -> T {
        self.energy
    }

    /// `Σ_j E^TF(z_j)` for the neutral atoms.
    pub fn atom_energy(&self) -> T {
        self.atom_energy
    }

    /// `D^TF = E_mol − Σ E_atom + U_R`.
    pub fn binding(&self) -> T {
        self.energy - self.atom_energy + self.config.nuclear_repulsion()
    }

    /// Final grid residual in density units.
    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual_history(&self) -> &[f64] {
        &self.history
    }

    /// Electron number `Σ z_j + ∫(ρ − Σρ_j)`.
    pub fn electron_number(&self) -> T {
        let sup = superpose(self.grid(), &self.config, &self.atoms);
        let diff: T = self
            .rho
            .values()
            .iter()
            .zip(&sup.rho)
            .map(|(&a, &b)| a - b)
            .sum();
        self.config.total_charge() + diff * self.grid().cell_volume()
    }
}

/// Minimises the molecular TF functional over `ρ ≥ 0, ∫ρ ≤ n`.
pub fn solve_tf<T: Real>(
    config: &NuclearConfiguration<T>,
    n: T,
    grid: Arc<Grid3D<T>>,
    universal: Arc<UniversalTF<T>>,
    opts: &TfOptions<T>,
) -> Result<TFSolution<T>> {
    if !(n > T::zero()) {
        return Err(contract(format!("particle number must be positive, got {n}")));
    }
    let atoms = Arc::new(AtomSet::new(config, universal)?);
    let sup = superpose(&grid, config, &atoms);
    let z_tot = config.total_charge();
    let problem = Problem {
        grid: &grid,
        base: &sup.phi,
        subtract: Some(&sup.rho),
        mask: None,
        scale: z_tot,
    };
    let far = FarField::new(atoms.atom(0).universal().clone(), config.charge_center(), z_tot, n)?;
    let mut u0 = vec![T::zero(); grid.len()];
    // The neutral solution lies between the largest atomic potential and
    // their sum, so the model is clipped to that band.
    let neutral = n >= z_tot;
    set_boundary(&grid, &mut u0, |x| {
        let parts = config
            .positions()
            .iter()
            .enumerate()
            .map(|(j, &p)| atoms.atom(j).phi_at(dist(x, p)));
        let (sum, max) = parts.fold((T::zero(), T::zero()), |(s, m), v| (s + v, m.max(v)));
        let model = far.potential(x);
        let phi = if neutral { model.max(max).min(sum) } else { model.min(sum) };
        sum - phi
    });
    let dv = grid.cell_volume();
    let count = |rho: &[T]| -> T { z_tot + rho.iter().zip(&sup.rho).map(|(&a, &b)| a - b).sum::<T>() * dv };
    // With n ≥ Z the constraint is inactive and the neutral solution is the
    // minimiser; its grid charge differs from Z only by truncation error.
    let (out, mu) = if n >= z_tot {
        (problem.solve(T::zero(), &u0, opts)?, T::zero())
    } else {
        problem.solve_bounded(&u0, n, config.z_max() / grid.h(), count, opts)?
    };

    let u = out.u;
    let rho = out.rho;
    let phi: Vec<T> = sup.phi.iter().zip(&u).map(|(&a, &b)| a - b).collect();
    let sigma: Vec<T> = rho.iter().zip(&sup.rho).map(|(&a, &b)| a - b).collect();
    let ck = tf_kinetic(T::lit(2.0));
    let mut local = T::zero();
    let mut self_term = T::zero();
    for i in 0..grid.len() {
        let r = rho[i];
        local += ck * r * r.cbrt() * r.cbrt() - sup.kinetic[i] - sup.phi[i] * sigma[i];
        self_term += sigma[i] * u[i];
    }
    let mut delta = (local + T::lit(0.5) * self_term) * dv;
    let k = config.len();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = dist(config.positions()[i], config.positions()[j]);
            delta -= config.charges()[i] * atoms.atom(j).electron_potential_at(d);
            if i < j {
                delta += atoms.cloud_interaction(i, j, d, T::infinity());
            }
        }
    }
    let atom_energy = atoms.total_energy();
    Ok(TFSolution {
        config: config.clone(),
        atoms,
        rho: GridField::new(grid.clone(), rho, FieldKind::Density)?,
        phi: GridField::new(grid, phi, FieldKind::Potential)?,
        overlap_potential: u,
        mu,
        energy: atom_energy + delta,
        atom_energy,
        residual: out.residual,
        iterations: out.iterations,
        history: out.history,
    })
}

/// `D^TF(Z, R)` for the neutral molecule.
pub fn teller_check<T: Real>(
    config: &NuclearConfiguration<T>,
    grid: Arc<Grid3D<T>>,
    universal: Arc<UniversalTF<T>>,
    opts: &TfOptions<T>,
) -> Result<T> {
    let sol = solve_tf(config, config.total_charge(), grid, universal, opts)?;
    Ok(sol.binding())
}
