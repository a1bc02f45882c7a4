//! Variational analysis of higher-order quasi-linear elliptic functionals.

pub mod bifurcation;
pub mod cli;
pub mod error;
pub mod galerkin;
pub mod lagrangian;
pub mod linalg;
pub mod reduction;
pub mod spectral;

pub use error::{Result, VeldtError};
