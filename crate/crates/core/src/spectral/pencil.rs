use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use super::{decompose, same_group, GROUP_TOL};
use crate::error::{Result, VeldtError};
use crate::linalg;

/// One eigenvalue `λ_n` of `F″v = λG″v` with its eigenspace `H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilGroup {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Gram-orthonormal basis of `H_n`, one column per vector.
    pub basis: DMatrix<f64>,
    /// (negative, zero, positive) counts of `F″` restricted to `H_n`.
    pub inertia: (usize, usize, usize),
}

/// Sign structure of `F″` in the Gram geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
}

/// Eigenvalues of `L = F″⁻¹G″` inverted to `λ_n = 1/θ_n`, grouped, with `H₀ = Ker G″`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilSpectrum {
    pub groups: Vec<PencilGroup>,
    /// Gram-orthonormal basis of `Ker G″`.
    pub kernel: DMatrix<f64>,
    /// (negative, zero, positive) counts of `F″` on `H₀`.
    pub kernel_inertia: (usize, usize, usize),
    pub f_definiteness: Definiteness,
    pub f_condition: f64,
    /// `max ‖F″v − λ_n G″v‖_* / ‖v‖` over all basis vectors (dual norm).
    pub max_residual: f64,
}

/// How the Morse index formula obtains the inertia of `F″` on each eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorseMode {
    PositiveDefinite,
    NegativeDefinite,
    InvariantSubspaces,
}

const KERNEL_TOL: f64 = 1e-9;
const INERTIA_TOL: f64 = 1e-8;
const COND_LIMIT: f64 = 1e12;

fn restricted_inertia(f: &DMatrix<f64>, basis: &DMatrix<f64>) -> (usize, usize, usize) {
    if basis.ncols() == 0 {
        return (0, 0, 0);
    }
    let r = basis.transpose() * f * basis;
    let scale = linalg::max_abs(f).max(f64::MIN_POSITIVE);
    let vals = linalg::sym_eigenvalues(&r);
    let mut c = (0, 0, 0);
    for v in vals {
        if v < -INERTIA_TOL * scale {
            c.0 += 1;
        } else if v > INERTIA_TOL * scale {
            c.2 += 1;
        } else {
            c.1 += 1;
        }
    }
    c
}

fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let svd = SVD::new(a.clone(), false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax.max(f64::MIN_POSITIVE))
        .map(|i| vt.row(i).transpose())
        .collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    // Rank-deficient SVDs may return fewer rows than columns.
    if vt.nrows() < n {
        let extra = n - vt.nrows();
        let mut full = DMatrix::zeros(n, cols.len() + extra);
        full.columns_mut(0, cols.len()).copy_from(&out);
        let q = vt.transpose();
        let complement = null_complement(&q, extra);
        full.columns_mut(cols.len(), extra).copy_from(&complement);
        return full;
    }
    out
}

fn null_complement(q: &DMatrix<f64>, extra: usize) -> DMatrix<f64> {
    let n = q.nrows();
    let proj = DMatrix::identity(n, n) - q * q.transpose();
    let eig = nalgebra::SymmetricEigen::new(linalg::symmetrize(&proj));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = DMatrix::zeros(n, extra);
    for (j, &i) in idx.iter().take(extra).enumerate() {
        out.set_column(j, &eig.eigenvectors.column(i));
    }
    out
}

struct RawPair {
    lambda: f64,
    vector: nalgebra::DVector<f64>,
}

/// Solves the pencil `F″v = λG″v` in the geometry of `gram`.
pub fn pencil_eigs(
    f: &DMatrix<f64>,
    g: &DMatrix<f64>,
    gram: &DMatrix<f64>,
) -> Result<PencilSpectrum> {
    let n = f.nrows();
    let gram_chol = linalg::cholesky(gram, "Gram matrix")?;
    let (fvals, _) = linalg::generalized_eigen(f, &gram_chol);
    let fmax = fvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fmin = fvals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let f_condition = if fmin > 0.0 {
        fmax / fmin
    } else {
        f64::INFINITY
    };
    if !(f_condition <= COND_LIMIT) {
        return Err(VeldtError::HypothesisViolation(format!(
            "the Hessian of the principal functional is numerically singular (condition {f_condition:.3e}); \
             the linearized problem must have no nontrivial solutions"
        )));
    }
    let f_definiteness = if fvals.iter().all(|v| *v > 0.0) {
        Definiteness::Positive
    } else if fvals.iter().all(|v| *v < 0.0) {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    };
    let (gvals, _) = linalg::generalized_eigen(g, &gram_chol);
    let gmax = gvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g_definite = gvals.iter().all(|v| *v > KERNEL_TOL * gmax)
        || gvals.iter().all(|v| *v < -KERNEL_TOL * gmax);

    let mut raw: Vec<RawPair> = Vec::new();
    let mut kernel_cols: Vec<nalgebra::DVector<f64>> = Vec::new();
    match f_definiteness {
        Definiteness::Positive | Definiteness::Negative => {
            let s = if f_definiteness == Definiteness::Positive {
                1.0
            } else {
                -1.0
            };
            let chol = linalg::cholesky(&(f * s), "definite Hessian")?;
            // L⁻¹ G L⁻ᵀ w = η w with θ = sη, λ = s/η.
            let (eta, v) = linalg::generalized_eigen(g, &chol);
            let emax = eta.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            for (k, e) in eta.iter().enumerate() {
                let col = v.column(k).into_owned();
                if e.abs() <= KERNEL_TOL * emax.max(f64::MIN_POSITIVE) {
                    kernel_cols.push(col);
                } else {
                    raw.push(RawPair {
                        lambda: s / e,
                        vector: col,
                    });
                }
            }
        }
        Definiteness::Indefinite if g_definite => {
            let s = if gvals[0] > 0.0 { 1.0 } else { -1.0 };
            let chol = linalg::cholesky(&(g * s), "definite mass form")?;
            let (mu, v) = linalg::generalized_eigen(f, &chol);
            for (k, m) in mu.iter().enumerate() {
                raw.push(RawPair {
                    lambda: s * m,
                    vector: v.column(k).into_owned(),
                });
            }
        }
        Definiteness::Indefinite => {
            let lu = f.clone().lu();
            let l = lu
                .solve(g)
                .ok_or_else(|| VeldtError::HypothesisViolation("Hessian not invertible".into()))?;
            let thetas = l.complex_eigenvalues();
            let tmax = thetas.iter().fold(0.0f64, |m, t| m.max(t.norm()));
            let mut real: Vec<f64> = thetas
                .iter()
                .filter(|t| t.norm() > KERNEL_TOL * tmax.max(f64::MIN_POSITIVE))
                .map(|t| {
                    if t.im.abs() > 1e-8 * t.norm() {
                        Err(VeldtError::Capability(
                            "pencil has complex eigenvalues; only self-adjoint pencils are supported".into(),
                        ))
                    } else {
                        Ok(t.re)
                    }
                })
                .collect::<Result<_>>()?;
            real.sort_by(f64::total_cmp);
            let mut reps: Vec<f64> = Vec::new();
            for t in real {
                if reps.last().is_none_or(|r| !same_group(*r, t)) {
                    reps.push(t);
                }
            }
            for t in reps {
                let ns = null_space(&(g - f * t), 1e-7);
                for c in ns.column_iter() {
                    raw.push(RawPair {
                        lambda: 1.0 / t,
                        vector: c.into_owned(),
                    });
                }
            }
            let ns = null_space(g, KERNEL_TOL);
            kernel_cols.extend(ns.column_iter().map(|c| c.into_owned()));
        }
    }

    raw.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut groups: Vec<PencilGroup> = Vec::new();
    let mut start = 0;
    while start < raw.len() {
        let mut end = start + 1;
        while end < raw.len() && same_group(raw[start].lambda, raw[end].lambda) {
            end += 1;
        }
        let mut basis = DMatrix::zeros(n, end - start);
        for (j, r) in raw[start..end].iter().enumerate() {
            basis.set_column(j, &r.vector);
        }
        let basis = linalg::gram_orthonormalize(gram, &basis);
        let lambda = raw[start..end].iter().map(|r| r.lambda).sum::<f64>() / (end - start) as f64;
        groups.push(PencilGroup {
            lambda,
            multiplicity: end - start,
            inertia: restricted_inertia(f, &basis),
            basis,
        });
        start = end;
    }
    let mut kernel = DMatrix::zeros(n, kernel_cols.len());
    for (j, c) in kernel_cols.iter().enumerate() {
        kernel.set_column(j, c);
    }
    let kernel = linalg::gram_orthonormalize(gram, &kernel);

    let mut max_residual = 0.0f64;
    for grp in &groups {
        for c in grp.basis.column_iter() {
            let c = c.into_owned();
            let r = f * &c - g * &c * grp.lambda;
            let scale = (f * &c).norm().max(f64::MIN_POSITIVE);
            max_residual = max_residual.max(r.norm() / scale);
        }
    }
    Ok(PencilSpectrum {
        kernel_inertia: restricted_inertia(f, &kernel),
        groups,
        kernel,
        f_definiteness,
        f_condition,
        max_residual,
    })
}

impl PencilSpectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.lambda).collect()
    }

    /// Group whose eigenvalue matches `lambda` within the grouping tolerance.
    pub fn find(&self, lambda: f64) -> Option<&PencilGroup> {
        self.groups.iter().find(|g| same_group(g.lambda, lambda))
    }

    /// Distance from `lambda` to the nearest eigenvalue other than `lambda` itself.
    pub fn separation(&self, lambda: f64) -> f64 {
        self.groups
            .iter()
            .filter(|g| !same_group(g.lambda, lambda))
            .map(|g| (g.lambda - lambda).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Morse index of `F″ − λG″` from the pencil data.
///
/// On `H_n` the form equals `(1 − λ/λ_n)F″`, so its negative directions are
/// `H_n⁺` when `1 − λ/λ_n < 0` and `H_n⁻` otherwise; on `H₀` it is `F″`.
pub fn morse_index_by_formula(
    pencil: &PencilSpectrum,
    lambda: f64,
    mode: MorseMode,
) -> Result<usize> {
    if let Some(g) = pencil.find(lambda) {
        return Err(VeldtError::EigenvalueCollision {
            lambda,
            eigenvalue: g.lambda,
        });
    }
    let inertia = |grp_inertia: (usize, usize, usize), dim: usize| match mode {
        MorseMode::PositiveDefinite => (0, 0, dim),
        MorseMode::NegativeDefinite => (dim, 0, 0),
        MorseMode::InvariantSubspaces => grp_inertia,
    };
    let mut count = 0;
    for g in &pencil.groups {
        let (neg, _, pos) = inertia(g.inertia, g.multiplicity);
        if 1.0 - lambda / g.lambda < 0.0 {
            count += pos;
        } else {
            count += neg;
        }
    }
    count += inertia(pencil.kernel_inertia, pencil.kernel.ncols()).0;
    Ok(count)
}

/// Direct and formula Morse indices on both sides of a pencil eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexJump {
    pub lambda_star: f64,
    pub epsilon: f64,
    pub mu_minus: usize,
    pub mu_plus: usize,
    pub nu: usize,
    pub nu_plus: usize,
    pub nu_minus: usize,
    pub expected_jump: i64,
}

/// Checks `μ₊ − μ₋` against the crossing multiplicity by direct eigensolves of `F″ − (λ*±ε)G″`.
pub fn index_jump(
    pencil: &PencilSpectrum,
    f: &DMatrix<f64>,
    g: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    lambda_star: f64,
    epsilon: f64,
) -> Result<IndexJump> {
    let grp = pencil.find(lambda_star).ok_or_else(|| {
        VeldtError::Configuration(format!("{lambda_star} is not an eigenvalue of the pencil"))
    })?;
    if !(epsilon > 0.0 && epsilon < 0.5 * pencil.separation(lambda_star)) {
        return Err(VeldtError::Configuration(format!(
            "offset {epsilon} must be positive and below half the separation {}",
            pencil.separation(lambda_star)
        )));
    }
    let direct =
        |lam: f64| -> Result<usize> { Ok(decompose(&(f - g * lam), gram, None)?.morse_index) };
    let mu_minus = direct(lambda_star - epsilon)?;
    let mu_plus = direct(lambda_star + epsilon)?;
    let (nu_minus, _, nu_plus) = grp.inertia;
    let signed = nu_plus as i64 - nu_minus as i64;
    let expected_jump = if grp.lambda > 0.0 { signed } else { -signed };
    let mode = MorseMode::InvariantSubspaces;
    let formula_minus = morse_index_by_formula(pencil, lambda_star - epsilon, mode)?;
    let formula_plus = morse_index_by_formula(pencil, lambda_star + epsilon, mode)?;
    let jump = mu_plus as i64 - mu_minus as i64;
    if jump != expected_jump || formula_minus != mu_minus || formula_plus != mu_plus {
        return Err(VeldtError::Inconsistency(format!(
            "at λ* = {lambda_star}: direct (μ₋, μ₊) = ({mu_minus}, {mu_plus}), formula ({formula_minus}, \
             {formula_plus}), expected jump {expected_jump}"
        )));
    }
    Ok(IndexJump {
        lambda_star: grp.lambda,
        epsilon,
        mu_minus,
        mu_plus,
        nu: grp.multiplicity,
        nu_plus,
        nu_minus,
        expected_jump,
    })
}

/// Relative tolerance used to merge eigenvalues into one multiplicity class.
pub const fn grouping_tolerance() -> f64 {
    GROUP_TOL
}
