//! Lyapunov–Schmidt reduction of `𝓛_λ⃗ = 𝓕 − Σ λ_j 𝓖_j` onto the kernel `H⁰`
//! of its Hessian at a degenerate critical point, and the Marino–Prodi
//! perturbation that removes the degeneracy.

mod audit;
mod functional;
mod newton;
mod perturb;
mod setup;

pub use audit::{
    lipschitz_audit, reduced_hessian_at_origin, uniqueness_probe, LipschitzAudit, ReducedHessian,
    UniquenessProbe,
};
pub use functional::{AtLambda, Functional, ParamFunctional};
pub use newton::{find_critical_point, regularized_solve, NewtonOptions, NewtonOutcome};
pub use perturb::{
    annulus_gradient_floor, marino_prodi_audit, marino_prodi_perturb, MarinoProdiReport,
    PerturbOptions, PerturbationTrial, Perturbed, PerturbedPoint,
};
pub use setup::{
    write_reduced_csv, PsiSolution, ReducedSample, ReductionSetup, SetupOptions, PSI_TOL,
};
