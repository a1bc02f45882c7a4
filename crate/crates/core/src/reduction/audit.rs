use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ReductionSetup, PSI_TOL};
use crate::error::{Result, VeldtError};

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return v * radius;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzAudit {
    pub pairs: usize,
    pub radius: f64,
    /// `max ‖ψ(z₁) − ψ(z₂)‖ / ‖z₁ − z₂‖` over the sampled pairs.
    pub max_ratio: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Samples pairs in the ball of `radius` in `H⁰` and measures the Lipschitz quotient of `ψ`.
pub fn lipschitz_audit(
    setup: &ReductionSetup,
    lambda: &[f64],
    n_pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<LipschitzAudit> {
    let radius = radius.min(setup.trust_radius());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = setup.kernel_dim();
    let mut max_ratio = 0.0f64;
    for _ in 0..n_pairs {
        let z1 = random_in_ball(&mut rng, nu, radius);
        let z2 = random_in_ball(&mut rng, nu, radius);
        let dz = (&z1 - &z2).norm();
        if dz < 1e-12 {
            continue;
        }
        let p1 = setup.solve_psi(lambda, &z1, PSI_TOL, None)?;
        let p2 = setup.solve_psi(lambda, &z2, PSI_TOL, Some(&p1.coords))?;
        max_ratio = max_ratio.max((&p1.coords - &p2.coords).norm() / dz);
    }
    Ok(LipschitzAudit {
        pairs: n_pairs,
        radius,
        max_ratio,
        bound: 3.0,
        passed: max_ratio <= 3.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    pub starts: usize,
    pub converged: usize,
    pub max_pairwise: f64,
    pub passed: bool,
}

/// Solves for `ψ(λ⃗, z)` from random complement starts inside the trust radius.
pub fn uniqueness_probe(
    setup: &ReductionSetup,
    lambda: &[f64],
    z: &DVector<f64>,
    n_starts: usize,
    seed: u64,
) -> Result<UniquenessProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = setup.complement().ncols();
    let mut sols: Vec<DVector<f64>> = Vec::new();
    for _ in 0..n_starts {
        // Random direction in the complement, radius uniform in (0, ρ).
        let dir = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let start = dir.normalize() * (setup.trust_radius() * rng.gen_range(0.0..1.0));
        if let Ok(s) = setup.solve_psi(lambda, z, PSI_TOL, Some(&start)) {
            sols.push(s.coords);
        }
    }
    let mut max_pairwise = 0.0f64;
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            max_pairwise = max_pairwise.max((&sols[i] - &sols[j]).norm());
        }
    }
    Ok(UniquenessProbe {
        starts: n_starts,
        converged: sols.len(),
        max_pairwise,
        passed: sols.len() == n_starts && max_pairwise < 1e-8,
    })
}

/// Reduced Hessian at `z = 0`: closed form against a finite-difference oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHessian {
    /// `−Σ_j (λ_j − λ*_j) Eᵀ 𝓖_j″(u₀) E`.
    pub closed_form: DMatrix<f64>,
    /// Richardson-extrapolated central differences of the reduced gradient.
    pub finite_difference: DMatrix<f64>,
    pub relative_error: f64,
}

pub fn reduced_hessian_at_origin(setup: &ReductionSetup, lambda: &[f64]) -> Result<ReducedHessian> {
    let nu = setup.kernel_dim();
    let e = setup.kernel();
    let g = setup.family().g_hessians(setup.base_point())?;
    let mut closed = DMatrix::zeros(nu, nu);
    let mut scale = 0.0;
    for ((gj, l), ls) in g.iter().zip(lambda).zip(setup.lambda_star()) {
        let r = e.transpose() * gj * e;
        scale += r.abs().max();
        closed -= r * (l - ls);
    }
    let h = 5e-3 * setup.trust_radius();
    let grad = |z: DVector<f64>| setup.reduced_gradient(lambda, &z);
    let mut fd = DMatrix::zeros(nu, nu);
    for a in 0..nu {
        let ea = DVector::from_fn(nu, |i, _| if i == a { 1.0 } else { 0.0 });
        let central =
            |s: f64| -> Result<DVector<f64>> { Ok((grad(&ea * s)? - grad(&ea * -s)?) / (2.0 * s)) };
        let coarse = central(h)?;
        let fine = central(0.5 * h)?;
        fd.set_column(a, &((fine * 4.0 - coarse) / 3.0));
    }
    let fd = (&fd + fd.transpose()) * 0.5;
    let denom = closed.abs().max().max(1e-3 * scale).max(f64::MIN_POSITIVE);
    let relative_error = (&fd - &closed).abs().max() / denom;
    if relative_error > 1e-4 {
        return Err(VeldtError::IdentityViolation(format!(
            "reduced Hessian at the origin differs from the closed form by {relative_error:.3e} (relative)"
        )));
    }
    Ok(ReducedHessian {
        closed_form: closed,
        finite_difference: fd,
        relative_error,
    })
}
