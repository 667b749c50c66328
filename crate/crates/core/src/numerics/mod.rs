//! Grids, quadrature, Poisson and eigenvalue solvers, fits and ODEs.

pub mod cube;
pub mod dst;
pub mod eigen;
pub mod field;
pub mod fit;
pub mod grid3d;
pub mod ode;
pub mod poisson;
pub mod quad;
pub mod radial;
pub mod simplex;
pub mod sphere;

pub use field::{FieldKind, GridField, Mesh, RadialField, ScalarField};
pub use fit::{powerlaw_fit, PowerLawFit};
pub use grid3d::{Anchor, Grid3D};
pub use radial::RadialGrid;
