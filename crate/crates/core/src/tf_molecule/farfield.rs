//! Far-field model used as Dirichlet data on the box faces.
//!
//! A neutral cluster of net nuclear charge `Q` is replaced by the neutral TF
//! atom of charge `Q` at its charge-weighted center. With fewer electrons
//! than `Q` the Coulomb tail of the excess charge takes over once it is the
//! larger of the two.

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::numerics::grid3d::dist;
use crate::real::Real;
use crate::tf_atom::{atomic_tf, scaled_grid, AtomicTFSolution, UniversalTF};

#[derive(Debug, Clone)]
pub struct FarField<T: Real> {
    center: [T; 3],
    charge: T,
    electrons: T,
    atom: Arc<AtomicTFSolution<T>>,
}

impl<T: Real> FarField<T> {
    pub fn new(universal: Arc<UniversalTF<T>>, center: [T; 3], charge: T, electrons: T) -> Result<Self> {
        if !(charge > T::zero()) || electrons < T::zero() {
            return Err(contract(format!(
                "far field needs positive charge and nonnegative electron count, got {charge}, {electrons}"
            )));
        }
        let grid = Arc::new(scaled_grid(charge, T::lit(1e-6), T::lit(1e6), T::lit(0.01))?);
        let atom = Arc::new(atomic_tf(charge, grid, universal)?);
        Ok(Self {
            center,
            charge,
            electrons,
            atom,
        })
    }

    pub fn center(&self) -> [T; 3] {
        self.center
    }

    pub fn charge(&self) -> T {
        self.charge
    }

    /// Model potential `φ` at `x`.
    pub fn potential(&self, x: [T; 3]) -> T {
        let s = dist(x, self.center).max(T::epsilon());
        let neutral = self.atom.phi_at(s);
        if self.electrons >= self.charge {
            neutral
        } else {
            neutral.max((self.charge - self.electrons) / s)
        }
    }
}
