//! Born–Oppenheimer surfaces, their short-range scaling limit and the
//! screening diagnostics behind them.

mod constants;
mod curve;
mod gamma;
mod outside;
mod screened;
mod search;

pub use constants::{Constants, Exponents};
pub use curve::{at_distance, bo_ks, bo_tf, ks_atom_energy, ks_sweep, tf_sweep, BOCurve, BoPoint, Theory};
pub use gamma::{extrapolate, gamma_from_points, gamma_limit, GammaEstimate};
pub use outside::{outside_decomposition_check, qij_profiles, qij_tf, OutsideReport};
pub use screened::{profile_from_pairs, screened_compare, Membership, ScreenedProfile};
pub use search::{min_distance_search, SearchOptions, SearchResult, Subadditivity};
