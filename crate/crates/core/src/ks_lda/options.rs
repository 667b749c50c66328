#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions<T> {
    /// Converged once `‖ρ_out − ρ_in‖₁ ≤ density_tol · N`.
    pub density_tol: T,
    /// Eigen-residual tolerance for the Cartesian solver.
    pub eigen_tol: T,
    pub max_iter: usize,
    /// Anderson history length.
    pub depth: usize,
    /// Simple-mixing weight.
    pub mixing: T,
    /// Highest angular momentum in the radial solver.
    pub l_max: usize,
    /// Radial states kept per angular momentum.
    pub states_per_l: usize,
    /// Unoccupied orbitals carried by the Cartesian eigensolver.
    pub extra_states: usize,
    pub seed: u64,
}

impl<T: crate::real::Real> Default for ScfOptions<T> {
    fn default() -> Self {
        Self {
            density_tol: T::lit(1e-6),
            eigen_tol: T::lit(1e-7),
            max_iter: 200,
            depth: 5,
            mixing: T::lit(0.3),
            l_max: 3,
            states_per_l: 4,
            extra_states: 4,
            seed: 7,
        }
    }
}
