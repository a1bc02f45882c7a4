use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Functional;
use crate::error::{Result, VeldtError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop when `‖𝓛′(u)‖_* < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest accepted step in the `(·,·)_{m,2}` norm.
    pub max_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonOutcome {
    #[serde(skip)]
    pub u: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `A δ = −r`, shifting `A` by multiples of `G` when it is singular.
pub fn regularized_solve(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    r: &DVector<f64>,
) -> Option<DVector<f64>> {
    let scale = a.abs().max().max(1.0);
    let mut tau = 0.0;
    for _ in 0..8 {
        let m = if tau == 0.0 { a.clone() } else { a + g * tau };
        if let Some(x) = m.lu().solve(&(-r)) {
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        tau = if tau == 0.0 {
            1e-10 * scale
        } else {
            tau * 100.0
        };
    }
    None
}

/// Damped Newton iteration for a critical point of `f`.
///
/// Backtracks on `½‖𝓛′‖²_*`; every step is capped at `max_step`.
pub fn find_critical_point(
    f: &dyn Functional,
    u0: &DVector<f64>,
    opts: NewtonOptions,
) -> Result<NewtonOutcome> {
    let disc = f.disc();
    let mut u = u0.clone();
    let mut grad = f.gradient(&u)?;
    let mut res = disc.dual_norm(&grad);
    for it in 0..opts.max_iter {
        if res < opts.tol {
            return Ok(NewtonOutcome {
                u,
                residual: res,
                iterations: it,
            });
        }
        let h = f.hessian(&u)?;
        let mut step =
            regularized_solve(&h, disc.gram(), &grad).ok_or(VeldtError::NewtonFailure {
                iterations: it,
                residual: res,
            })?;
        let len = disc.norm(&step);
        if len > opts.max_step {
            step *= opts.max_step / len;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &u + &step * alpha;
            if let Ok(g) = f.gradient(&trial) {
                let r = disc.dual_norm(&g);
                if r.is_finite() && r * r <= (1.0 - 1e-4 * alpha) * res * res {
                    u = trial;
                    grad = g;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Stagnation at round-off level counts as convergence only if already within tolerance.
            return Err(VeldtError::NewtonFailure {
                iterations: it,
                residual: res,
            });
        }
    }
    if res < opts.tol {
        return Ok(NewtonOutcome {
            u,
            residual: res,
            iterations: opts.max_iter,
        });
    }
    Err(VeldtError::NewtonFailure {
        iterations: opts.max_iter,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{build_space, BoundaryCondition, Domain, SpaceSpec};
    use crate::lagrangian::catalog;
    use crate::reduction::ParamFunctional;
    use std::f64::consts::PI;

    #[test]
    fn finds_one_mode_pitchfork_solution() {
        let disc = build_space(&SpaceSpec::new(
            Domain::interval(0.0, PI),
            1,
            BoundaryCondition::Dirichlet,
            16,
        ))
        .unwrap();
        let fam = ParamFunctional::new(
            catalog::p2(1).unwrap(),
            vec![catalog::mass(1, 1, 1).unwrap()],
            disc,
        )
        .unwrap();
        let f = fam.at(&[1.05]).unwrap();
        let start = fam.disc().mode(0, 0, 0.3);
        let out = find_critical_point(&f, &start, NewtonOptions::default()).unwrap();
        assert!(out.residual < 1e-10);
        let a = out.u[0];
        // One-mode balance a = 2√((λ−1)/3), corrected by the higher harmonics.
        assert!((a - 2.0 * (0.05f64 / 3.0).sqrt()).abs() < 0.01 * a, "{a}");
        assert!(out.u[1].abs() < 1e-12);
        // Third harmonic balances the sin³ forcing: (9 − λ)c₃ ≈ a³/4.
        let c3 = a.powi(3) / (4.0 * (9.0 - 1.05));
        assert!(
            (out.u[2] - c3).abs() < 0.1 * c3.abs(),
            "{} vs {c3}",
            out.u[2]
        );
    }
}
