use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{assemble_hessian, BoundaryCondition, Discretization, HessianSplit};
use crate::error::{Result, VeldtError};
use crate::lagrangian::Lagrangian;
use crate::linalg;

/// `Ŝ = max ∫|u|² / Σ_{|α|=m} ∫|D^α u|²` over the discrete space (`p = 2`).
pub fn estimate_sobolev_constant(disc: &Discretization) -> Result<f64> {
    if disc.spec().bc != BoundaryCondition::Dirichlet {
        return Err(VeldtError::Capability(
            "the Sobolev estimate needs dirichlet_m boundary conditions".into(),
        ));
    }
    let chol = linalg::cholesky(disc.mass(), "mass matrix")?;
    let (vals, _) = linalg::generalized_eigen(disc.top_stiffness(), &chol);
    Ok(1.0 / vals[0])
}

/// Decay profile of `‖Q e_k‖_{m,2} / ‖e_k‖_{m,2}` over the basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessAudit {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub last_ratio: f64,
    /// The audit is only meaningful for `K ≥ 32`.
    pub applicable: bool,
    pub passed: bool,
}

/// Uses an already assembled split.
pub fn q_decay_profile(split: &HessianSplit, disc: &Discretization) -> CompactnessAudit {
    let gram = disc.gram();
    let ratios: Vec<f64> = (0..disc.dim())
        .map(|k| {
            let col = split.q.column(k).into_owned();
            let riesz = disc.riesz(&col);
            linalg::gram_norm(gram, &riesz) / gram[(k, k)].sqrt()
        })
        .collect();
    let nb = disc.basis_count();
    // Per-component decay: use the last basis function of each component.
    let last_ratio = (0..disc.components())
        .map(|i| ratios[i * nb + nb - 1])
        .fold(0.0f64, f64::max);
    let max_ratio = ratios.iter().copied().fold(0.0f64, f64::max);
    let applicable = nb >= 32;
    CompactnessAudit {
        passed: applicable && last_ratio < 0.1 * max_ratio,
        ratios,
        max_ratio,
        last_ratio,
        applicable,
    }
}

/// Assembles the split at `u` and measures the decay of `Q` along the basis.
pub fn q_compactness_audit(
    lag: &Lagrangian,
    u: &DVector<f64>,
    disc: &Discretization,
) -> Result<CompactnessAudit> {
    let split = assemble_hessian(lag, disc, u)?;
    Ok(q_decay_profile(&split, disc))
}

/// Constants with `(Bv, v) ≥ C₁‖v‖²_{m,2} − C₂‖v‖²_{m−1,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GardingConstants {
    pub c1: f64,
    pub c2: f64,
}

/// `C₁ = C₀/2` and the smallest `C₂` making the bound hold on the discrete space.
pub fn garding_constants(split: &HessianSplit, disc: &Discretization) -> Result<GardingConstants> {
    let c1 = 0.5 * split.c0_estimate;
    let lhs: DMatrix<f64> = disc.gram() * c1 - &split.b;
    let low = linalg::cholesky(disc.gram_low(), "lower-order Gram matrix")?;
    let (vals, _) = linalg::generalized_eigen(&lhs, &low);
    let c2 = vals[vals.len() - 1].max(0.0);
    Ok(GardingConstants { c1, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{build_space, Domain, SpaceSpec};
    use crate::lagrangian::catalog;
    use std::f64::consts::PI;

    fn space(a: f64, b: f64, k: usize) -> Discretization {
        build_space(&SpaceSpec::new(
            Domain::interval(a, b),
            1,
            BoundaryCondition::Dirichlet,
            k,
        ))
        .unwrap()
    }

    #[test]
    fn sobolev_estimate_matches_first_eigenvalue() {
        assert!((estimate_sobolev_constant(&space(0.0, PI, 1)).unwrap() - 1.0).abs() < 1e-13);
        assert!((estimate_sobolev_constant(&space(0.0, PI, 16)).unwrap() - 1.0).abs() < 1e-12);
        let s = estimate_sobolev_constant(&space(0.0, 1.0, 16)).unwrap();
        assert!((s - 1.0 / (PI * PI)).abs() < 1e-13);
        let beam = build_space(&SpaceSpec::new(
            Domain::interval(0.0, 1.0),
            2,
            BoundaryCondition::Dirichlet,
            6,
        ))
        .unwrap();
        let mu = crate::galerkin::basis::beam_root(1);
        assert!((estimate_sobolev_constant(&beam).unwrap() * mu.powi(4) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_problem_has_rational_decay() {
        let disc = space(0.0, PI, 32);
        let audit = q_compactness_audit(&catalog::p1(1).unwrap(), &disc.zero(), &disc).unwrap();
        for (k, r) in audit.ratios.iter().enumerate() {
            let kk = (k + 1) as f64;
            assert!((r - 1.0 / (1.0 + kk * kk)).abs() < 1e-12);
        }
        assert!(audit.passed);
    }

    #[test]
    fn garding_bound_holds_for_linear_problem() {
        let disc = space(0.0, PI, 16);
        let split = assemble_hessian(&catalog::p1(1).unwrap(), &disc, &disc.zero()).unwrap();
        let g = garding_constants(&split, &disc).unwrap();
        assert!(g.c1 > 0.0 && g.c2 >= 0.0);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        for _ in 0..100 {
            let v = disc.random_field(&mut rng, 1.0);
            let lhs = v.dot(&(&split.b * &v));
            let rhs = g.c1 * disc.inner(&v, &v) - g.c2 * v.dot(&(disc.gram_low() * &v));
            assert!(lhs >= rhs - 1e-12);
        }
    }
}
