//! Exact combinatorial geometry of the affine group.
//!
//! Energies `E(A)`, `E*(A)` of finite sets of affine maps, their
//! decomposition into slices `Q_C`, the reduction of each slice to a
//! point–plane incidence count in projective 3-space, shadows of planar point
//! sets, quadrangle counts and rich-line structure in grids. All arithmetic is
//! exact, over `F_p` or `Q`, and every fast counter has a brute-force twin.

pub mod affine;
pub mod bounds;
pub mod energy;
pub mod error;
pub mod generators;
pub mod incidence;
pub mod plane;
pub mod report;
pub mod richlines;
pub mod scalar;

pub use error::{Error, Result};
