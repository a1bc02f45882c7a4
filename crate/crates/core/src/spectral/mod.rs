//! Gram-generalized eigenproblems: Morse index and nullity of Hessians, the
//! linearized pencil `F″v = λG″v`, and Morse index bookkeeping across it.

mod audit;
mod decompose;
mod pencil;

pub use audit::{hypothesis11_audit, ContinuityAudit};
pub use decompose::{
    decompose, decompose_with, DecomposeOptions, SpectralDecomposition, SpectrumSummary,
};
pub use pencil::{
    grouping_tolerance, index_jump, morse_index_by_formula, pencil_eigs, Definiteness, IndexJump,
    MorseMode, PencilGroup, PencilSpectrum,
};

pub(crate) const GROUP_TOL: f64 = 1e-6;

/// Whether two eigenvalues belong to the same multiplicity class.
pub fn same_group(a: f64, b: f64) -> bool {
    (a - b).abs() <= GROUP_TOL * a.abs().max(b.abs())
}
