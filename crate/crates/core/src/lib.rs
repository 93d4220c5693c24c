//! Numerical verification of quantum fluctuation relations.
//!
//! The crate evaluates the Cauchy–Schwarz fluctuation formula and the
//! Robertson–Schrödinger relation on sampled wave functions and density
//! matrices, detects when the latter is inapplicable through hermiticity
//! defects, and models a measurement as an information channel acting on the
//! probability density and current of the measured state.

pub mod annex;
pub mod error;
pub mod exec;
pub mod numerics;
pub mod matrixqm;
pub mod measurement;
pub mod qstate;
pub mod relations;
pub mod states;

pub use error::{Error, Result};
pub use exec::Exec;
