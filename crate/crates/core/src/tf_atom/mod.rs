//! Atomic Thomas–Fermi theory.

mod atom;
mod universal;

pub use atom::{atomic_screened_tf, atomic_tf, scaled_grid, AtomicTFSolution};
pub use universal::UniversalTF;

/// Convenience wrapper: the universal function on `(0, x_max]` with slope
/// bracketed to `tol`.
pub fn solve_universal<T: crate::Real>(x_max: T, tol: T) -> crate::Result<UniversalTF<T>> {
    UniversalTF::solve(x_max, tol)
}
