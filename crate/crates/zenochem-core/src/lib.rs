//! Spin dynamics of recombining radical-ion pairs: dense density-matrix
//! propagation under two rival kinetic theories, magnetic-field-effect
//! observables, and a self-contained correctness suite.
//!
//! Layer map: [`matrix`] (complex dense linear algebra newtype) → [`spin`]
//! (operator construction) → [`model`] (Hamiltonian + parameters) →
//! [`propagation`] (RK4 time stepping + population bookkeeping) with
//! [`liouville`] as the independent matrix-exponential route →
//! [`experiments`] (named scenarios, MFE curves, sweeps) → [`validation`]
//! (named pass/fail property checks).

pub mod error;
pub mod experiments;
pub mod liouville;
pub mod matrix;
pub mod model;
pub mod propagation;
pub mod spin;
pub mod validation;

pub use error::{Error, Result};
