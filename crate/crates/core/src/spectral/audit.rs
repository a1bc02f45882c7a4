use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::galerkin::{assemble_hessian, Discretization};
use crate::lagrangian::Lagrangian;
use crate::linalg;

/// Continuity of the principal part `P` and the compact part `Q` near `u0`,
/// and the uniform ellipticity constant of `P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityAudit {
    /// `‖x_k − u0‖_{m,2}`, decreasing.
    pub distances: Vec<f64>,
    /// `max_v ‖(P(x_k) − P(u0))v‖_* / ‖v‖`.
    pub p_deviation: Vec<f64>,
    /// `‖Q(x_k) − Q(u0)‖` in the same operator norm.
    pub q_deviation: Vec<f64>,
    /// Log-log slope of the deviation against the distance; `None` when identically zero.
    pub p_slope: Option<f64>,
    pub q_slope: Option<f64>,
    /// Smallest generalized eigenvalue of `(P(x_k), G)` over all samples.
    pub c0: f64,
    pub trends_decrease: bool,
    pub passed: bool,
}

fn operator_norm(a: &DMatrix<f64>, disc: &Discretization) -> f64 {
    let (vals, _) = linalg::generalized_eigen(a, disc.gram_cholesky());
    vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, y)| **y > 1e-13)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-13)
}

/// Samples `x_k = u0 + radius·2⁻ᵏ·d` along a random unit direction `d`.
pub fn hypothesis11_audit(
    lag: &Lagrangian,
    u0: &DVector<f64>,
    disc: &Discretization,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ContinuityAudit> {
    let base = assemble_hessian(lag, disc, u0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = disc.random_field(&mut rng, 1.0);
    let norm = disc.norm(&d);
    if norm > 0.0 {
        d /= norm;
    }
    let mut distances = Vec::with_capacity(n_samples);
    let mut p_deviation = Vec::with_capacity(n_samples);
    let mut q_deviation = Vec::with_capacity(n_samples);
    let mut c0 = base.c0_estimate;
    for k in 0..n_samples {
        let t = radius * 0.5f64.powi(k as i32);
        let split = assemble_hessian(lag, disc, &(u0 + &d * t))?;
        distances.push(t);
        p_deviation.push(operator_norm(&(&split.p - &base.p), disc));
        q_deviation.push(operator_norm(&(&split.q - &base.q), disc));
        c0 = c0.min(split.c0_estimate);
    }
    let trends_decrease = nonincreasing(&p_deviation) && nonincreasing(&q_deviation);
    Ok(ContinuityAudit {
        p_slope: loglog_slope(&distances, &p_deviation),
        q_slope: loglog_slope(&distances, &q_deviation),
        passed: trends_decrease && c0 > 0.0,
        distances,
        p_deviation,
        q_deviation,
        c0,
        trends_decrease,
    })
}
