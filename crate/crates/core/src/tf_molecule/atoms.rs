//! Atomic TF references placed at the nuclei of a configuration.

use std::sync::Arc;

use super::config::NuclearConfiguration;
use crate::error::Result;
use crate::numerics::quad::gauss_legendre;
use crate::numerics::RadialGrid;
use crate::real::Real;
use crate::tf_atom::{atomic_tf, scaled_grid, AtomicTFSolution, UniversalTF};

/// One neutral TF atom per nucleus (shared between equal charges) plus the
/// tabulated `W(s) = ∫_0^s t w(t) dt` of its electron potential `w`.
#[derive(Debug, Clone)]
pub struct AtomSet<T: Real> {
    atoms: Vec<Arc<AtomicTFSolution<T>>>,
    moments: Vec<Arc<Vec<T>>>,
}

impl<T: Real> AtomSet<T> {
    pub fn new(config: &NuclearConfiguration<T>, universal: Arc<UniversalTF<T>>) -> Result<Self> {
        let mut atoms: Vec<Arc<AtomicTFSolution<T>>> = Vec::new();
        let mut moments: Vec<Arc<Vec<T>>> = Vec::new();
        for &z in config.charges() {
            if let Some(k) = atoms.iter().position(|a| a.z() == z) {
                atoms.push(atoms[k].clone());
                moments.push(moments[k].clone());
                continue;
            }
            let grid = Arc::new(scaled_grid(z, T::lit(1e-6), T::lit(1e6), T::lit(0.01))?);
            let a = atomic_tf(z, grid, universal.clone())?;
            moments.push(Arc::new(potential_moment(&a)));
            atoms.push(Arc::new(a));
        }
        Ok(Self { atoms, moments })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, j: usize) -> &Arc<AtomicTFSolution<T>> {
        &self.atoms[j]
    }

    /// Sum of the neutral atomic energies.
    pub fn total_energy(&self) -> T {
        self.atoms.iter().map(|a| a.energy_from_slope()).sum()
    }

    fn moment_at(&self, j: usize, s: T) -> T {
        let a = &self.atoms[j];
        let g: &RadialGrid<T> = a.grid();
        let m = &self.moments[j];
        if s <= g.r_min() {
            return T::lit(0.5) * a.electron_potential_at(T::zero()) * s * s;
        }
        if s >= g.r_max() {
            return *m.last().unwrap() + a.z() * (s - g.r_max());
        }
        g.interpolate(m, s)
    }

    /// Spherical mean of atom `j`'s electron potential over the sphere of
    /// radius `r` whose center is at distance `d` from nucleus `j`.
    pub fn shell_mean_potential(&self, j: usize, d: T, r: T) -> T {
        let hi = self.moment_at(j, d + r);
        let lo = self.moment_at(j, num_traits::Float::abs(d - r));
        (hi - lo) / (T::lit(2.0) * r * d)
    }

    /// `2D(ρ_i, ρ_j) = ∫ ρ_j w_i` for nuclei `i ≠ j`, at their actual
    /// separation `d`, restricted to `ρ_j` inside radius `cut` of nucleus `j`
    /// (pass infinity for the full cloud).
    pub fn cloud_interaction(&self, i: usize, j: usize, d: T, cut: T) -> T {
        let aj = &self.atoms[j];
        let gj = aj.grid();
        let lo = gj.r_min().ln();
        let top = gj.r_max().min(cut);
        let four_pi = T::lit(4.0) * T::PI();
        let f = |t: T| {
            let r = t.exp();
            four_pi * r * r * r * aj.rho_at(r) * self.shell_mean_potential(i, d, r)
        };
        let core = {
            let r0 = gj.r_min();
            // ρ ∝ r^{-3/2} inside the first node.
            four_pi * T::lit(2.0 / 3.0) * r0 * r0 * r0 * aj.rho_at(r0) * self.shell_mean_potential(i, d, T::lit(0.5) * r0)
        };
        let panels = |a: T, b: T| ((b - a) / T::lit(0.05)).ceil().to_usize().unwrap_or(1).max(1);
        let ld = d.ln();
        let lt = top.ln();
        if ld < lt {
            core + gauss_legendre(lo, ld, panels(lo, ld), f) + gauss_legendre(ld, lt, panels(ld, lt), f)
        } else {
            core + gauss_legendre(lo, lt, panels(lo, lt), f)
        }
    }
}

/// Cumulative `∫_0^{r_i} t w(t) dt` on the atom's radial grid.
fn potential_moment<T: Real>(a: &AtomicTFSolution<T>) -> Vec<T> {
    let g = a.grid();
    let integrand: Vec<T> = g
        .nodes()
        .iter()
        .map(|&r| r * r * a.electron_potential_at(r))
        .collect();
    let r0 = g.r_min();
    let core = T::lit(0.5) * a.electron_potential_at(T::zero()) * r0 * r0;
    g.cumulative_t(&integrand).into_iter().map(|v| v + core).collect()
}
