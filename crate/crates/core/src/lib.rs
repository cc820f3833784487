//! Hyperinterpolation and least-squares polynomial projections on the unit
//! sphere, their Lebesgue constants, and the uniformity statistics of the
//! node sets they are built on.

pub mod error;
pub mod exec;
pub mod geometry;
pub mod harmonics;
pub mod orthopoly;
pub mod pointsets;
pub mod projections;
pub mod quadrature;
pub mod sum;

pub use error::{Error, Result};
pub use exec::Exec;
pub use geometry::{EvaluationSet, SpherePoint};
