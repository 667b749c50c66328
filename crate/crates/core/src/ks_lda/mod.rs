//! Extended Kohn–Sham LDA theory with fractional occupations.

mod atom;
mod checks;
mod mixing;
mod molecule;
mod options;
mod state;
mod xc;

pub use atom::{atom_grid, scf_atom};
pub use checks::{
    check_exchange_bound, kinetic_scaling_check, ExchangeBoundReport, ExchangeBoundRow, ScalingReport,
    ScalingRow,
};
pub use molecule::{cell_averaged_potential, ks_grid, scf_molecule, KsGridPolicy};
pub use options::ScfOptions;
pub use state::{aufbau, EnergyTerms, KSState, Orbital, DEGENERACY_TOL};
pub use xc::{exchange_energy, make_functional, XcFunctional, XcKind};
