//! Neutral TF atoms from the universal function by exact scaling.

use std::sync::Arc;

use num_traits::Float;

use super::universal::UniversalTF;
use crate::constants::{tf_density, tf_kinetic, tf_length};
use crate::error::{contract, Result};
use crate::numerics::{FieldKind, RadialField, RadialGrid};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct AtomicTFSolution<T: Real> {
    z: T,
    length: T,
    universal: Arc<UniversalTF<T>>,
    rho: RadialField<T>,
    phi: RadialField<T>,
    energy: T,
    residual: T,
}

/// Log grid matched to the TF length of charge `z`, spanning
/// `[x_lo, x_hi]` in scaled units.
pub fn scaled_grid<T: Real>(z: T, x_lo: T, x_hi: T, dt: T) -> Result<RadialGrid<T>> {
    let b = tf_length::<T>() * z.powf(-T::lit(1.0 / 3.0));
    RadialGrid::logarithmic(x_lo * b, x_hi * b, dt)
}

/// Neutral atom of charge `z` sampled on `grid`. The energy is the
/// quadrature of the TF functional on the grid.
pub fn atomic_tf<T: Real>(
    z: T,
    grid: Arc<RadialGrid<T>>,
    universal: Arc<UniversalTF<T>>,
) -> Result<AtomicTFSolution<T>> {
    if !(z > T::zero()) {
        return Err(contract(format!("nuclear charge must be positive, got {z}")));
    }
    let b = tf_length::<T>() * z.powf(-T::lit(1.0 / 3.0));
    if grid.r_min() > T::lit(1e-2) * b {
        return Err(contract("radial grid starts outside the atomic core"));
    }
    let missing = T::one() - universal.charge_fraction(grid.r_max() / b);
    if missing > T::lit(1e-3) {
        return Err(contract(format!(
            "radial grid ends at {} and misses {:.3e} of the charge",
            grid.r_max(),
            missing
        )));
    }
    let two = T::lit(2.0);
    let phi: Vec<T> = grid
        .nodes()
        .iter()
        .map(|&r| z * universal.y(r / b) / r)
        .collect();
    let rho: Vec<T> = phi.iter().map(|&p| tf_density(p, two)).collect();

    let ck = tf_kinetic(two);
    let kin: Vec<T> = rho.iter().map(|&p| ck * p.powf(T::lit(5.0 / 3.0))).collect();
    let ext: Vec<T> = grid.nodes().iter().zip(&rho).map(|(&r, &p)| z * p / r).collect();
    let ve = grid.newton_potential(&rho);
    let har: Vec<T> = ve.iter().zip(&rho).map(|(&v, &p)| v * p).collect();
    let energy = grid.integrate(&kin) - grid.integrate(&ext) + T::lit(0.5) * grid.integrate(&har);

    let residual = grid
        .nodes()
        .iter()
        .zip(&ve)
        .zip(&phi)
        .map(|((&r, &v), &p)| Float::abs(z / r - v - p) * r / z)
        .fold(T::zero(), T::max);

    let grid_ref = grid.clone();
    Ok(AtomicTFSolution {
        z,
        length: b,
        universal,
        rho: RadialField::new(grid_ref.clone(), rho, FieldKind::Density)?,
        phi: RadialField::new(grid_ref, phi, FieldKind::Potential)?,
        energy,
        residual,
    })
}

impl<T: Real> AtomicTFSolution<T> {
    pub fn z(&self) -> T {
        self.z
    }

    /// TF length `b = ½(3π/4)^{2/3} z^{-1/3}`.
    pub fn length(&self) -> T {
        self.length
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        self.rho.grid()
    }

    pub fn universal(&self) -> &Arc<UniversalTF<T>> {
        &self.universal
    }

    pub fn rho(&self) -> &RadialField<T> {
        &self.rho
    }

    pub fn phi(&self) -> &RadialField<T> {
        &self.phi
    }

    /// Quadrature of the functional.
    pub fn energy(&self) -> T {
        self.energy
    }

    /// Energy from the initial slope: `(3/7) B z² / b`.
    pub fn energy_from_slope(&self) -> T {
        T::lit(3.0 / 7.0) * self.universal.slope_b() * self.z * self.z / self.length
    }

    /// Chemical potential; always zero for the neutral atom.
    pub fn mu(&self) -> T {
        T::zero()
    }

    /// Largest mismatch between the tabulated potential and the one
    /// recomputed from the density by Newton's theorem, relative to `z/r`.
    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn phi_at(&self, r: T) -> T {
        self.z * self.universal.y(r / self.length) / r
    }

    pub fn rho_at(&self, r: T) -> T {
        tf_density(self.phi_at(r), T::lit(2.0))
    }

    /// Electron charge inside radius `r`.
    pub fn charge_within(&self, r: T) -> T {
        self.z * self.universal.charge_fraction(r / self.length)
    }

    /// Coulomb potential of the electron cloud, `z/r − φ(r)`, finite at 0.
    pub fn electron_potential_at(&self, r: T) -> T {
        let x = r / self.length;
        if x < T::lit(1e-8) {
            return -self.z * self.universal.slope_b() / self.length;
        }
        self.z * (T::one() - self.universal.y(x)) / r
    }

    /// `z/s − ∫_{|y|<r} ρ(y)/|x − y| dy` at `|x| = s`.
    pub fn screened_at(&self, s: T, r: T) -> T {
        let q = self.charge_within(r);
        if s >= r {
            (self.z - q) / s
        } else {
            self.phi_at(s) + self.electron_potential_at(r) - q / r
        }
    }
}

impl<T: Real> AtomicTFSolution<T> {
    /// `ℰ^TF_{V}(ρ 1_{|x|>r})` with `V = 1_{|x|>r} Φ_r`, the value of the
    /// exterior problem with charge bound `z − ∫_{|x|<r} ρ`.
    pub fn exterior_energy(&self, r: T) -> T {
        let ck = tf_kinetic(T::lit(2.0));
        let q = self.charge_within(r);
        let four_pi = T::lit(4.0) * T::PI();
        let f = |t: T| {
            let s = t.exp();
            let p = self.rho_at(s);
            let w_out = self.electron_potential_at(s) - q / s;
            four_pi * s * s * s * (ck * p * p.cbrt() * p.cbrt() - (self.z - q) * p / s + T::lit(0.5) * p * w_out)
        };
        let lo = r.ln();
        let hi = self.grid().r_max().ln().max(lo);
        let panels = ((hi - lo) / T::lit(0.05)).ceil().to_usize().unwrap_or(1).max(1);
        crate::numerics::quad::gauss_legendre(lo, hi, panels, f)
    }
}

/// `Φ_{j,r}` on the atom's radial grid.
pub fn atomic_screened_tf<T: Real>(sol: &AtomicTFSolution<T>, r: T) -> Result<RadialField<T>> {
    let grid = sol.grid().clone();
    if !(r > T::zero()) || r > grid.r_max() {
        return Err(contract(format!(
            "screening radius {r} outside (0, {}]",
            grid.r_max()
        )));
    }
    let vals = grid.nodes().iter().map(|&s| sol.screened_at(s, r)).collect();
    RadialField::new(grid, vals, FieldKind::Potential)
}
