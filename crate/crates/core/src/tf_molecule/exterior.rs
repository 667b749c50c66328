//! TF problem restricted to the exterior region `A_r`.
//!
//! Minimises `c_TF ∫ρ^{5/3} − ∫V_r ρ + D(ρ, ρ)` over densities supported
//! on `A_r` with `∫ρ ≤ N`. The unknown is the electron potential
//! `w = ρ ⋆ |x|^{-1}`; the density on a cut cell is its `A_r` fraction times
//! `ρ_TF(V_r − w − μ)`.

use std::sync::Arc;

use super::config::RegionMask;
use super::newton::{Problem, TfOptions};
use crate::constants::{tf_density, tf_kinetic};
use crate::error::{contract, Result};
use crate::numerics::grid3d::Grid3D;
use crate::numerics::poisson::set_boundary;
use crate::numerics::{FieldKind, GridField};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct ExteriorTF<T: Real> {
    rho: GridField<T>,
    phi: GridField<T>,
    weights: Vec<T>,
    mu: T,
    energy: T,
    charge: T,
    residual: T,
    iterations: usize,
    history: Vec<f64>,
}

impl<T: Real> ExteriorTF<T> {
    pub fn grid(&self) -> &Arc<Grid3D<T>> {
        self.rho.grid()
    }

    /// Cell-averaged `ρ_r`.
    pub fn rho(&self) -> &GridField<T> {
        &self.rho
    }

    /// `V_r − ρ_r ⋆ |x|^{-1}`.
    pub fn phi(&self) -> &GridField<T> {
        &self.phi
    }

    /// `A_r` fraction of every cell.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// `ℰ^TF_{V_r}(ρ_r)`.
    pub fn energy(&self) -> T {
        self.energy
    }

    /// `∫ρ_r`.
    pub fn charge(&self) -> T {
        self.charge
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual_history(&self) -> &[f64] {
        &self.history
    }
}

/// Solves the exterior problem for the potential `v_r`, whose values inside
/// the excluded balls are ignored. `far` gives the model `φ` on the box
/// faces, from which the boundary data `w = v_r − φ` are taken.
pub fn exterior_tf<T: Real>(
    v_r: &GridField<T>,
    mask: &RegionMask<T>,
    charge_bound: T,
    far: impl Fn([T; 3]) -> T,
    opts: &TfOptions<T>,
) -> Result<ExteriorTF<T>> {
    if !(charge_bound > T::zero()) {
        return Err(contract(format!("charge bound must be positive, got {charge_bound}")));
    }
    if v_r.kind() != FieldKind::Potential {
        return Err(contract("exterior potential must be a potential field"));
    }
    let grid = v_r.grid().clone();
    let base = v_r.values();
    let weights = mask.outside_weights(&grid);
    let problem = Problem {
        grid: &grid,
        base,
        subtract: None,
        mask: Some(&weights),
        scale: charge_bound,
    };
    let mut u0 = vec![T::zero(); grid.len()];
    set_boundary(&grid, &mut u0, |x| {
        let v = grid.trilinear(base, x).unwrap_or(T::zero());
        v - far(x)
    });
    let dv = grid.cell_volume();
    let count = |rho: &[T]| rho.iter().copied().sum::<T>() * dv;
    let mu_hi = base
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&v, _)| v)
        .fold(T::zero(), T::max);
    let (out, mu) = problem.solve_bounded(&u0, charge_bound, mu_hi.max(T::epsilon()), count, opts)?;

    let ck = tf_kinetic(T::lit(2.0));
    let two = T::lit(2.0);
    let mut e = T::zero();
    for i in 0..grid.len() {
        let w = weights[i];
        if w == T::zero() {
            continue;
        }
        let r = tf_density(base[i] - out.u[i] - mu, two);
        e += w * ck * r * r.cbrt() * r.cbrt() - base[i] * out.rho[i] + T::lit(0.5) * out.rho[i] * out.u[i];
    }
    let charge = count(&out.rho);
    let phi: Vec<T> = base.iter().zip(&out.u).map(|(&a, &b)| a - b).collect();
    Ok(ExteriorTF {
        rho: GridField::new(grid.clone(), out.rho, FieldKind::Density)?,
        phi: GridField::new(grid, phi, FieldKind::Potential)?,
        weights,
        mu,
        energy: e * dv,
        charge,
        residual: out.residual,
        iterations: out.iterations,
        history: out.history,
    })
}
