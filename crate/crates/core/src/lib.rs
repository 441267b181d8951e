//! Complex-source pulsed-beam wavelets of the 3+1D wave equation.
//!
//! Units have `c = 1`; lengths and times share one abstract unit.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod render;
pub mod shell;
mod suites;
pub mod verify;
pub mod wavelet;

pub use error::{Error, Result};
pub use geometry::{BranchCut, ComplexDistance, SourceVector, SpacetimePoint, Vec3};
pub use wavelet::{EmissionCenter, FieldValue};
