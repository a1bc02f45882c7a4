use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::linalg;
use crate::spectral::{index_jump, same_group, Definiteness, IndexJump, PencilSpectrum};

/// Outcome of the necessary condition: bifurcation at `(λ*, u₀)` requires `λ*` in the pencil spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NecessaryVerdict {
    pub lambda_star: f64,
    pub eigenvalue: Option<f64>,
    pub multiplicity: usize,
    pub passed: bool,
}

pub fn necessary_test(pencil: &PencilSpectrum, lambda_star: f64) -> NecessaryVerdict {
    match pencil
        .groups
        .iter()
        .find(|g| same_group(g.lambda, lambda_star))
    {
        Some(g) => NecessaryVerdict {
            lambda_star,
            eigenvalue: Some(g.lambda),
            multiplicity: g.multiplicity,
            passed: true,
        },
        None => NecessaryVerdict {
            lambda_star,
            eigenvalue: None,
            multiplicity: 0,
            passed: false,
        },
    }
}

/// Sufficient condition satisfied at `λ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionClass {
    /// `F″` positive definite.
    A,
    /// `F″` negative definite.
    B,
    /// Every eigenspace is `F″`-invariant and `F″` is definite on `H_{n₀}`.
    C,
    None,
}

/// Relative tolerance of the invariance test `‖(I − Π_n) G⁻¹F″ Π_n‖`.
const INVARIANCE_TOL: f64 = 1e-8;

pub fn classify_conditions(
    f: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    pencil: &PencilSpectrum,
    lambda_star: f64,
) -> Result<ConditionClass> {
    match pencil.f_definiteness {
        Definiteness::Positive => return Ok(ConditionClass::A),
        Definiteness::Negative => return Ok(ConditionClass::B),
        Definiteness::Indefinite => {}
    }
    let Some(target) = pencil.find(lambda_star) else {
        return Ok(ConditionClass::None);
    };
    let chol = linalg::cholesky(gram, "Gram matrix")?;
    // F″ as an operator in the Gram geometry.
    let op = chol.solve(f);
    let scale = {
        let (vals, _) = linalg::generalized_eigen(f, &chol);
        vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let invariant = |basis: &DMatrix<f64>| {
        let image = &op * basis;
        let proj = basis * (basis.transpose() * gram * &image);
        let defect = image - proj;
        // Gram operator norm bounded by the largest column norm times √dim.
        let worst = defect
            .column_iter()
            .map(|c| linalg::gram_norm(gram, &c.into_owned()))
            .fold(0.0f64, f64::max);
        worst <= INVARIANCE_TOL * scale * (basis.ncols() as f64).sqrt()
    };
    let all_invariant = pencil.groups.iter().all(|g| invariant(&g.basis))
        && (pencil.kernel.ncols() == 0 || invariant(&pencil.kernel));
    let (neg, zero, pos) = target.inertia;
    let definite = zero == 0 && (neg == 0 || pos == 0);
    Ok(if all_invariant && definite {
        ConditionClass::C
    } else {
        ConditionClass::None
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexJumpReport {
    pub lambda_star: f64,
    pub epsilon: f64,
    pub jump: Option<IndexJump>,
    pub consistent: bool,
    pub error: Option<String>,
}

/// Offset used for index-jump checks: a quarter of the distance to the next
/// eigenvalue, capped at `0.1·max(1, |λ*|)`.
pub fn jump_epsilon(pencil: &PencilSpectrum, lambda_star: f64) -> f64 {
    let cap = 0.1 * lambda_star.abs().max(1.0);
    let sep = pencil.separation(lambda_star);
    if sep.is_finite() {
        cap.min(0.25 * sep)
    } else {
        cap
    }
}

/// Runs the index-jump check and records the verdict instead of failing.
pub fn index_jump_report(
    pencil: &PencilSpectrum,
    f: &DMatrix<f64>,
    g: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    lambda_star: f64,
    epsilon: f64,
) -> IndexJumpReport {
    match index_jump(pencil, f, g, gram, lambda_star, epsilon) {
        Ok(j) => IndexJumpReport {
            lambda_star,
            epsilon,
            jump: Some(j),
            consistent: true,
            error: None,
        },
        Err(e) => IndexJumpReport {
            lambda_star,
            epsilon,
            jump: None,
            consistent: false,
            error: Some(e.to_string()),
        },
    }
}
