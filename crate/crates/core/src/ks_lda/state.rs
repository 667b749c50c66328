//! Converged Kohn–Sham states and occupation bookkeeping.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Mesh, ScalarField};
use crate::real::Real;

/// Eigenvalues closer than this to the Fermi level share its electrons.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// One spatial orbital. Radial orbitals carry their angular momentum and
/// stand for the whole `2ℓ + 1` multiplet; values are normalised so that
/// the grid integral of their square is one.
#[derive(Debug, Clone)]
pub struct Orbital<T> {
    pub eigenvalue: T,
    /// Electrons per orbital of the multiplet, in `[0, q]`.
    pub occupation: T,
    pub angular: Option<usize>,
    pub values: Vec<T>,
}

impl<T: Real> Orbital<T> {
    /// Number of orbitals this entry represents.
    pub fn multiplicity(&self) -> usize {
        self.angular.map_or(1, |l| 2 * l + 1)
    }

    /// Electrons carried by the entry.
    pub fn electrons(&self) -> T {
        self.occupation * T::from_usize_lossy(self.multiplicity())
    }
}

/// `ℰ = kinetic + external + hartree − xc`, with `external = −∫Vρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms<T> {
    pub kinetic: T,
    pub external: T,
    pub hartree: T,
    pub xc: T,
    pub total: T,
}

impl<T: Real> EnergyTerms<T> {
    pub fn new(kinetic: T, external: T, hartree: T, xc: T) -> Self {
        Self {
            kinetic,
            external,
            hartree,
            xc,
            total: kinetic + external + hartree - xc,
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// `|total − (kinetic + external + hartree − xc)| / |total|`.
    pub fn identity_defect(&self) -> T {
        let sum = self.kinetic + self.external + self.hartree - self.xc;
        let scale = self.total.mag().max(T::min_positive_value());
        (self.total - sum).mag() / scale
    }
}

#[derive(Debug, Clone)]
pub struct KSState<T: Real, G: Mesh<T>> {
    pub(crate) q: T,
    pub(crate) electrons: T,
    pub(crate) orbitals: Vec<Orbital<T>>,
    pub(crate) rho: ScalarField<T, G>,
    pub(crate) energy: EnergyTerms<T>,
    pub(crate) history: Vec<f64>,
    pub(crate) orthonormality: T,
    pub(crate) max_eigen_residual: T,
}

impl<T: Real, G: Mesh<T>> KSState<T, G> {
    pub fn grid(&self) -> &Arc<G> {
        self.rho.grid()
    }

    pub fn spin_degeneracy(&self) -> T {
        self.q
    }

    pub fn electrons(&self) -> T {
        self.electrons
    }

    pub fn orbitals(&self) -> &[Orbital<T>] {
        &self.orbitals
    }

    /// `ρ₀ = Σ λ_i |φ_i|²`.
    pub fn rho(&self) -> &ScalarField<T, G> {
        &self.rho
    }

    pub fn energy(&self) -> &EnergyTerms<T> {
        &self.energy
    }

    pub fn total_energy(&self) -> T {
        self.energy.total
    }

    /// Density residual per SCF iteration.
    pub fn scf_history(&self) -> &[f64] {
        &self.history
    }

    /// Largest `|⟨φ_i, φ_j⟩ − δ_ij|` among orbitals of equal symmetry.
    pub fn orthonormality_defect(&self) -> T {
        self.orthonormality
    }

    /// Largest `‖(H − ε_i) φ_i‖` among occupied orbitals, final iteration.
    pub fn max_eigen_residual(&self) -> T {
        self.max_eigen_residual
    }

    /// Occupied eigenvalue spectrum, lowest first.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.orbitals.iter().map(|o| o.eigenvalue).collect()
    }
}

/// Aufbau occupations for levels `(ε, orbitals per level)`, filled with `n`
/// electrons at `q` per orbital. Levels within [`DEGENERACY_TOL`] of the
/// Fermi level split its electrons evenly per orbital. Returns per-orbital
/// occupations in input order.
pub fn aufbau<T: Real>(levels: &[(T, usize)], n: T, q: T) -> Result<Vec<T>> {
    let mut occ = vec![T::zero(); levels.len()];
    if n <= T::zero() {
        return Ok(occ);
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].0.partial_cmp(&levels[b].0).unwrap_or(std::cmp::Ordering::Equal));
    let capacity = |i: usize| q * T::from_usize_lossy(levels[i].1);
    let total: T = order.iter().map(|&i| capacity(i)).sum();
    if total < n * (T::one() - T::lit(1e-12)) {
        return Err(Error::Unbound(format!(
            "only {total} electron slots in bound levels, {n} requested"
        )));
    }
    // Fermi level: first level at which the cumulative capacity reaches n.
    let mut filled = T::zero();
    let mut fermi = levels[order[0]].0;
    for &i in &order {
        filled += capacity(i);
        fermi = levels[i].0;
        if filled >= n * (T::one() - T::lit(1e-12)) {
            break;
        }
    }
    let tol = T::lit(DEGENERACY_TOL);
    let mut below = T::zero();
    let mut shell_orbitals = 0usize;
    for (i, &(e, m)) in levels.iter().enumerate() {
        if e < fermi - tol {
            occ[i] = q;
            below += capacity(i);
        } else if (e - fermi).mag() <= tol {
            shell_orbitals += m;
        }
    }
    let share = (n - below) / T::from_usize_lossy(shell_orbitals);
    for (i, &(e, _)) in levels.iter().enumerate() {
        if (e - fermi).mag() <= tol {
            occ[i] = share.min(q).max(T::zero());
        }
    }
    Ok(occ)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neon_like_filling() {
        let levels = [(-30.0, 1), (-1.5, 1), (-0.5, 3), (0.2, 5)];
        let occ = aufbau::<f64>(&levels, 10.0, 2.0).unwrap();
        assert_eq!(occ, vec![2.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn open_shell_is_fractional() {
        let levels = [(-10.0, 1), (-0.7, 1), (-0.3, 3)];
        let occ = aufbau::<f64>(&levels, 6.0, 2.0).unwrap();
        assert_eq!(occ[0], 2.0);
        assert_eq!(occ[1], 2.0);
        assert!((occ[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_levels_share_evenly() {
        let levels = [(-1.0, 1), (-0.2, 1), (-0.2 + 1e-8, 1)];
        let occ = aufbau::<f64>(&levels, 3.0, 2.0).unwrap();
        assert_eq!(occ[1], occ[2]);
        assert!((occ.iter().sum::<f64>() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn empty_state_and_unbound_request() {
        assert_eq!(aufbau::<f64>(&[(-1.0, 1)], 0.0, 2.0).unwrap(), vec![0.0]);
        assert!(matches!(aufbau::<f64>(&[(-1.0, 1)], 3.0, 2.0), Err(Error::Unbound(_))));
    }

    #[test]
    fn energy_identity_holds_by_construction() {
        let e = EnergyTerms::new(1.5, -4.0, 0.8, 0.3);
        assert_eq!(e.total, 1.5 - 4.0 + 0.8 - 0.3);
        assert!(e.identity_defect() < 1e-15);
    }
}
