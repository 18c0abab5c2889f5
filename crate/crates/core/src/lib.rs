//! Finite-difference simulation of the stochastic Landau–Lifshitz–Gilbert
//! equation with spin-transfer torque on a one-dimensional wire.

pub mod checks;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod noise;
pub mod interp;
pub mod random;
pub mod stats;
pub mod vec3;
pub mod velocity;

pub use error::{Error, Result};
