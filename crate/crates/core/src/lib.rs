//! Lattice walks in the three-quadrant cone.
//!
//! The crate enumerates walks exactly and computes the diagonal generating
//! function through the kernel / conformal gluing / boundary value pipeline,
//! so that both routes can be compared.

pub mod bvp;
pub mod conformal;
pub mod elliptic;
pub mod enumerate;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod model;
pub mod poly;
pub mod pseries;
pub mod quad;
pub mod rational;

pub use error::{Error, Result};
pub use model::{GroupOrder, ModelValidation, Step, StepSet};
pub use pseries::{Branch, Coeff, LaurentZ, PuiseuxSeries};
pub use rational::Q;
