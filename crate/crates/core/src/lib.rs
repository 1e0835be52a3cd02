//! Reduced-order modeling of transient heat conduction through a wall.
//!
//! The wall is a single homogeneous layer with convective (Robin) boundaries on
//! both faces. The outside face additionally receives a prescribed heat flux.
//! A proper generalized decomposition (PGD) model is built once over space and
//! the parameters of one implicit Euler step, then evaluated online.

pub mod bases;
pub mod error;
pub mod fdm;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod pgd;
pub mod physics;
pub mod studies;

pub use bases::{ApproximationBasis, BasisKind, CoefficientRanges, SnapshotMatrix};
pub use error::{Error, Result};
pub use fdm::{BcKind, FieldSeries};
pub use grid::{GridKind, SpatialGrid};
pub use physics::{
    BoundarySignals, ConvectiveEnvironment, DimensionlessProblem, DimensionlessSignals, WallLayer,
};
