//! Molecular Thomas–Fermi theory on Cartesian grids.

mod atoms;
mod config;
mod exterior;
mod farfield;
mod newton;
mod screened;
mod solve;

pub use atoms::AtomSet;
pub use config::{NuclearConfiguration, RegionMask, MIN_SPHERE_SAMPLES};
pub use exterior::{exterior_tf, ExteriorTF};
pub use farfield::FarField;
pub use newton::TfOptions;
pub use screened::{screened_density, screened_tf, ScreenedPotential};
pub use solve::{solve_tf, teller_check, tf_grid, GridPolicy, TFSolution};
