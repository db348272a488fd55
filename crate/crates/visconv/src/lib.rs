//! Pseudo-spectral solver and inverse-problem toolkit for the 2D
//! incompressible Navier-Stokes equations on the periodic torus.
//!
//! The crate generates reference trajectories and sparse modal observations,
//! implements the nudging determining map, and recovers an unknown viscosity
//! from observations alone through a contractive fixed-point iteration, with
//! the a-priori sufficiency conditions computed and checked along the way.
//!
//! A narrative guide with runnable snippets lives in `book/`; the snippets
//! double as doc-tests (`cargo test --doc`).

pub mod assim;
pub mod error;
pub mod inverse;
pub mod sim;
pub mod spectral;
pub mod vsct;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;
