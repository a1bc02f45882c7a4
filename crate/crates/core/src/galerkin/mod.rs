//! Galerkin subspaces of `W^{m,2}` on boxes, quadrature, and assembly of the
//! functional, its gradient and its Hessian with the principal/compact split.

mod assembly;
mod audit;
pub mod basis;
mod export;
pub mod quadrature;
mod space;

pub use assembly::{
    assemble_dual_gradient, assemble_functional, assemble_gradient, assemble_hessian,
    assemble_hessian_matrix, Gradient, HessianSplit, SplitCheck,
};
pub use audit::{
    estimate_sobolev_constant, garding_constants, q_compactness_audit, q_decay_profile,
    CompactnessAudit, GardingConstants,
};
pub use basis::Basis;
pub use export::{read_matrix_csv, write_matrix_csv, FieldDoc};
pub use space::{build_space, BoundaryCondition, Discretization, Domain, SpaceSpec};
