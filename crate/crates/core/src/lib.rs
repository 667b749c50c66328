//! Thomas–Fermi and Kohn–Sham LDA solvers for atoms and diatomic
//! molecules, with tools for studying the Born–Oppenheimer surface.

pub mod bo_surface;
pub mod constants;
pub mod error;
pub mod ks_lda;
pub mod numerics;
pub mod real;
pub mod snapshot;
pub mod tf_atom;
pub mod tf_molecule;

pub use error::{Error, Result};
pub use real::Real;

pub type Grid3D = numerics::Grid3D<f64>;
pub type RadialGrid = numerics::RadialGrid<f64>;
pub type GridField = numerics::GridField<f64>;
pub type RadialField = numerics::RadialField<f64>;
pub type PowerLawFit = numerics::PowerLawFit<f64>;
pub type UniversalTF = tf_atom::UniversalTF<f64>;
pub type AtomicTFSolution = tf_atom::AtomicTFSolution<f64>;
pub type NuclearConfiguration = tf_molecule::NuclearConfiguration<f64>;
pub type GridPolicy = tf_molecule::GridPolicy<f64>;
pub type TfOptions = tf_molecule::TfOptions<f64>;
pub type TFSolution = tf_molecule::TFSolution<f64>;
pub type XcFunctional = ks_lda::XcFunctional<f64>;
pub type ScfOptions = ks_lda::ScfOptions<f64>;
pub type KsGridPolicy = ks_lda::KsGridPolicy<f64>;
pub type RadialKSState = ks_lda::KSState<f64, numerics::RadialGrid<f64>>;
pub type GridKSState = ks_lda::KSState<f64, numerics::Grid3D<f64>>;
pub type BoPoint = bo_surface::BoPoint<f64>;
pub type BOCurve = bo_surface::BOCurve<f64>;
pub type GammaEstimate = bo_surface::GammaEstimate<f64>;
pub type SearchOptions = bo_surface::SearchOptions<f64>;
pub type SearchResult = bo_surface::SearchResult<f64>;
