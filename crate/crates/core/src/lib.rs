//! Curvature invariants, heat invariants and Laplace spectra of compact
//! locally homogeneous three-manifolds.
//!
//! Exact rational arithmetic is used wherever inputs are rational; floating
//! point appears only for cubic roots, transcendental spectra and heat traces.

pub mod audibility;
pub mod cli;
pub mod cubic;
pub mod error;
pub mod invariants;
pub mod milnor;
pub mod rational;
pub mod spectra;
pub mod tensor;

pub use error::{GeomError, Result};
pub use rational::Rational;
