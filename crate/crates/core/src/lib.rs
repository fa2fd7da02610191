//! Exact computation of jet-level CR invariants of real-analytic
//! hypersurfaces `ρ(Z, Z̄) = 0` in `C^{n+1}`.
//!
//! Everything upstream of [`reflection`] is exact over `Q(i)`: formal Segre
//! varieties and their jets, the bordered-determinant second-order invariant
//! `Φ`, the associated complete second-order PDE system on the 1-jet chart,
//! and its Frobenius integrability residual. [`reflection`] evaluates the
//! reflection involution numerically.

pub mod corpus;
pub mod document;
pub mod error;
pub mod expr;
pub mod hypersurface;
pub mod pde;
pub mod reflection;
pub mod scalar;
pub mod segre;
pub mod series;

pub use error::{Error, Result};
pub use scalar::GaussianRational;
pub use series::{SeriesRing, TruncatedSeries};
