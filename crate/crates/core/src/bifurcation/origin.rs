use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::branches::reduced_newton;
use crate::error::{Result, VeldtError};
use crate::linalg;
use crate::reduction::ReductionSetup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginClass {
    LocalMin,
    LocalMax,
    Saddle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginClassification {
    pub lambda: f64,
    pub class: OriginClass,
    pub radii: Vec<f64>,
    /// `min` and `max` of `𝓛°(z) − 𝓛°(0)` over each sphere.
    pub sphere_ranges: Vec<(f64, f64)>,
    /// Eigenvalues of the reduced Hessian at `0`.
    pub hessian_eigenvalues: Vec<f64>,
    /// Classification implied by the reduced Hessian when it is nondegenerate.
    pub hessian_class: Option<OriginClass>,
}

fn sphere_directions(nu: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let mut dirs = Vec::new();
    for k in 0..nu {
        for s in [1.0, -1.0] {
            dirs.push(DVector::from_fn(nu, |i, _| if i == k { s } else { 0.0 }));
        }
    }
    if nu > 1 {
        for _ in 0..8 * nu {
            dirs.push(DVector::from_fn(nu, |_, _| rng.gen_range(-1.0..1.0)).normalize());
        }
    }
    dirs
}

/// Classifies `z = 0` as a critical point of `𝓛°_λ` by sampling spheres of three radii in `H⁰`.
pub fn classify_reduced_origin(
    setup: &ReductionSetup,
    lambda: f64,
    seed: u64,
) -> Result<OriginClassification> {
    let rho = setup.trust_radius();
    let radii = vec![0.1 * rho, 0.2 * rho, 0.3 * rho];
    let nu = setup.kernel_dim();
    let lam = [lambda];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Isolation census inside the smallest sphere.
    let min_amplitude = 1e-3;
    for dir in sphere_directions(nu, &mut rng) {
        for frac in [0.5, 1.0] {
            if let Ok(s) = reduced_newton(setup, &lam, &(&dir * (radii[0] * frac))) {
                let d = s.z.iter().map(|v| v * v).sum::<f64>().sqrt();
                if d > min_amplitude && d < radii[0] {
                    return Err(VeldtError::NotIsolated { distance: d });
                }
            }
        }
    }
    let center = setup.reduce(&lam, &DVector::zeros(nu), None)?;
    let dirs = sphere_directions(nu, &mut rng);
    let mut sphere_ranges = Vec::new();
    for r in &radii {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d in &dirs {
            let v = setup.reduce(&lam, &(d * *r), None)?.value - center.value;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        sphere_ranges.push((lo, hi));
    }
    let class = if sphere_ranges.iter().all(|(lo, _)| *lo > 0.0) {
        OriginClass::LocalMin
    } else if sphere_ranges.iter().all(|(_, hi)| *hi < 0.0) {
        OriginClass::LocalMax
    } else {
        OriginClass::Saddle
    };
    let h = setup.reduced_hessian(&center)?;
    let eig = linalg::sym_eigenvalues(&h);
    let scale =
        linalg::max_abs(&setup.family().f_hessian(setup.base_point())?).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let hessian_class = if eig.iter().all(|e| *e > tol) {
        Some(OriginClass::LocalMin)
    } else if eig.iter().all(|e| *e < -tol) {
        Some(OriginClass::LocalMax)
    } else if eig.iter().all(|e| e.abs() > tol) {
        Some(OriginClass::Saddle)
    } else {
        None
    };
    Ok(OriginClassification {
        lambda,
        class,
        radii,
        sphere_ranges,
        hessian_eigenvalues: eig,
        hessian_class,
    })
}
