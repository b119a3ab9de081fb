//! Numerical laboratory for Anosov representations of free groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`matlin`] small dense complex linear algebra (Cartan and Jordan
//!   projections, exterior and symmetric powers),
//! * [`words`] free-group combinatorics (reduced words, conjugacy classes),
//! * [`reps`] representations, weight functionals, certificates and
//!   parameter grids,
//! * [`spectrum`] orbit-sum engines (critical exponents, pressure,
//!   dynamical intersection),
//! * [`bowen`] independent Hausdorff dimension oracles (transfer operator
//!   and box counting),
//! * [`calculus`] finite-difference Hessians, pressure forms and the
//!   identity harness on parameter grids.

pub mod bowen;
pub mod calculus;
mod error;
pub mod fixtures;
pub mod matlin;
pub mod reps;
pub mod spectrum;
pub mod words;

pub use error::{Error, Result};
pub use matlin::{CartanVector, ProjMatrix, C64};
pub use reps::{ParamGrid, RepPoint, WeightFunctional};
pub use spectrum::{ClassSpectrum, ExponentEstimate};
pub use words::{ConjClass, Word};
