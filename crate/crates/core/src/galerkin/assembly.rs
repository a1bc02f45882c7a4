use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Discretization;
use crate::error::{Result, VeldtError};
use crate::lagrangian::{Jet, JetDerivatives, Lagrangian};
use crate::linalg;

/// Gradient of the functional in dual coordinates and as a Riesz representative.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// `ℓ_k = Σ_α ∫ f_α D^α e_k`.
    pub dual: DVector<f64>,
    /// `g` with `G g = ℓ`.
    pub riesz: DVector<f64>,
}

/// Hessian in dual coordinates with its principal/compact split.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianSplit {
    pub b: DMatrix<f64>,
    /// Top-order terms plus the lower-order identity.
    pub p: DMatrix<f64>,
    /// Mixed and lower-order terms minus the lower-order identity.
    pub q: DMatrix<f64>,
    /// Smallest generalized eigenvalue of `(P, G)`.
    pub c0_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitCheck {
    pub relative_defect: f64,
    pub symmetric: bool,
}

impl HessianSplit {
    /// `‖B − (P+Q)‖_max / ‖B‖_max` and exact symmetry of all three.
    pub fn check(&self) -> SplitCheck {
        let defect = linalg::max_abs(&(&self.b - (&self.p + &self.q)));
        let scale = linalg::max_abs(&self.b).max(f64::MIN_POSITIVE);
        let symmetric = [&self.b, &self.p, &self.q]
            .iter()
            .all(|m| *m == &m.transpose());
        SplitCheck {
            relative_defect: defect / scale,
            symmetric,
        }
    }
}

pub(crate) fn check_compatible(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<()> {
    if lag.n() != disc.n() || lag.m() != disc.m() || lag.components() != disc.components() {
        return Err(VeldtError::Configuration(format!(
            "Lagrangian (n={}, m={}, N={}) does not match discretization (n={}, m={}, N={})",
            lag.n(),
            lag.m(),
            lag.components(),
            disc.n(),
            disc.m(),
            disc.components()
        )));
    }
    if u.len() != disc.dim() {
        return Err(VeldtError::Configuration(format!(
            "field has {} coefficients, discretization has {}",
            u.len(),
            disc.dim()
        )));
    }
    if u.iter().any(|c| !c.is_finite()) {
        return Err(VeldtError::Configuration(
            "field has non-finite coefficients".into(),
        ));
    }
    Ok(())
}

fn for_each_node(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
    mut visit: impl FnMut(usize, f64, &JetDerivatives),
) -> Result<()> {
    check_compatible(lag, disc, u)?;
    let per = disc.indices().len();
    let jets = disc.node_jets(u);
    for q in 0..disc.node_count() {
        let vals: Vec<f64> = jets.row(q).iter().copied().collect();
        let jet = Jet::from_values(lag.components(), per, vals)?;
        let d = lag.eval_jet_derivatives(disc.node(q), &jet)?;
        visit(q, disc.weight(q), &d);
    }
    Ok(())
}

/// Quadrature value of `∫_Ω f(x, u, …, D^m u) dx`.
pub fn assemble_functional(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<f64> {
    check_compatible(lag, disc, u)?;
    let per = disc.indices().len();
    let jets = disc.node_jets(u);
    let mut buf = vec![0.0; lag.jet_dim()];
    let mut total = 0.0;
    for q in 0..disc.node_count() {
        for (b, v) in buf.iter_mut().zip(jets.row(q).iter()) {
            *b = *v;
        }
        let v = lag.integrand().value(disc.node(q), &buf);
        if !v.is_finite() {
            return Err(VeldtError::Evaluation {
                what: "integrand value",
                x: disc.node(q).to_vec(),
                entry: format!("jet {buf:?} (per component {per})"),
            });
        }
        total += disc.weight(q) * v;
    }
    Ok(total)
}

/// Dual gradient `ℓ` only.
pub fn assemble_dual_gradient(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    let nb = disc.basis_count();
    let per = disc.indices().len();
    let mut coef = DMatrix::zeros(disc.node_count(), lag.jet_dim());
    for_each_node(lag, disc, u, |q, w, d| {
        for (j, g) in d.gradient.iter().enumerate() {
            coef[(q, j)] = w * g;
        }
    })?;
    let mut dual = DVector::zeros(disc.dim());
    for j in 0..lag.jet_dim() {
        let col = coef.column(j);
        if col.iter().all(|c| *c == 0.0) {
            continue;
        }
        let (i, a) = (j / per, j % per);
        dual.rows_mut(i * nb, nb)
            .gemv(1.0, disc.index_table(a), &col, 1.0);
    }
    Ok(dual)
}

/// Dual gradient and its Riesz representative.
pub fn assemble_gradient(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<Gradient> {
    let dual = assemble_dual_gradient(lag, disc, u)?;
    let riesz = disc.riesz(&dual);
    if riesz.iter().any(|v| !v.is_finite()) {
        return Err(VeldtError::Discretization(
            "Gram solve produced non-finite values".into(),
        ));
    }
    Ok(Gradient { dual, riesz })
}

fn require_hilbert(lag: &Lagrangian) -> Result<()> {
    if lag.growth().p != 2.0 {
        return Err(VeldtError::Capability(format!(
            "Hessian requires p = 2 (for p = {} the gradient is only Gâteaux differentiable)",
            lag.growth().p
        )));
    }
    Ok(())
}

/// Weighted jet Hessian entries per node: column `r·dim + c` holds `w_q f_{rc}` (upper triangle only).
fn hessian_coefficients(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let dim = lag.jet_dim();
    let mut coef = DMatrix::zeros(disc.node_count(), dim * dim);
    for_each_node(lag, disc, u, |q, w, d| {
        for r in 0..dim {
            for c in r..dim {
                coef[(q, r * dim + c)] = w * d.hessian[r * dim + c];
            }
        }
    })?;
    Ok(coef)
}

/// Adds `Σ_q coef_q D^{α_a}e D^{α_b}eᵀ` (and its transpose off the diagonal) to the `(i, j)` block.
fn accumulate(
    target: &mut DMatrix<f64>,
    disc: &Discretization,
    coef: nalgebra::DVectorView<'_, f64>,
    (i, a): (usize, usize),
    (j, b): (usize, usize),
) {
    let nb = disc.basis_count();
    let mut scaled = disc.index_table(a).clone();
    for (q, c) in coef.iter().enumerate() {
        scaled.column_mut(q).scale_mut(*c);
    }
    let block = scaled * disc.index_table(b).transpose();
    let mut view = target.view_mut((i * nb, j * nb), (nb, nb));
    view += &block;
    if (i, a) != (j, b) {
        let mut view = target.view_mut((j * nb, i * nb), (nb, nb));
        view += block.transpose();
    }
}

fn nonzero(col: &nalgebra::DVectorView<'_, f64>) -> bool {
    col.iter().any(|c| *c != 0.0)
}

/// Full Hessian `B(u)` in dual coordinates.
pub fn assemble_hessian_matrix(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    require_hilbert(lag)?;
    let per = disc.indices().len();
    let dim = lag.jet_dim();
    let coef = hessian_coefficients(lag, disc, u)?;
    let mut b = DMatrix::zeros(disc.dim(), disc.dim());
    for r in 0..dim {
        for c in r..dim {
            let col = coef.column(r * dim + c);
            if nonzero(&col) {
                accumulate(&mut b, disc, col, (r / per, r % per), (c / per, c % per));
            }
        }
    }
    Ok(linalg::symmetrize(&b))
}

/// `B`, `P` and `Q` assembled from their own terms, with `C₀` of `P`.
pub fn assemble_hessian(
    lag: &Lagrangian,
    disc: &Discretization,
    u: &DVector<f64>,
) -> Result<HessianSplit> {
    require_hilbert(lag)?;
    let per = disc.indices().len();
    let dim = lag.jet_dim();
    let m = disc.m();
    let top: Vec<bool> = disc
        .indices()
        .indices()
        .iter()
        .map(|a| a.order() == m)
        .collect();
    let size = disc.dim();
    let coef = hessian_coefficients(lag, disc, u)?;
    let mut b = DMatrix::zeros(size, size);
    let mut p = DMatrix::zeros(size, size);
    let mut qm = DMatrix::zeros(size, size);
    for r in 0..dim {
        for c in r..dim {
            let col = coef.column(r * dim + c);
            if !nonzero(&col) {
                continue;
            }
            let ra = (r / per, r % per);
            let cb = (c / per, c % per);
            accumulate(&mut b, disc, col, ra, cb);
            if top[ra.1] && top[cb.1] {
                accumulate(&mut p, disc, col, ra, cb);
            } else {
                accumulate(&mut qm, disc, col, ra, cb);
            }
        }
    }
    let b = linalg::symmetrize(&b);
    let p = linalg::symmetrize(&(p + disc.gram_low()));
    let q = linalg::symmetrize(&(qm - disc.gram_low()));
    let (vals, _) = linalg::generalized_eigen(&p, disc.gram_cholesky());
    let c0_estimate = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(HessianSplit {
        b,
        p,
        q,
        c0_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{build_space, BoundaryCondition, Domain, SpaceSpec};
    use crate::lagrangian::catalog;
    use std::f64::consts::PI;

    fn sine_space(k: usize) -> Discretization {
        build_space(&SpaceSpec::new(
            Domain::interval(0.0, PI),
            1,
            BoundaryCondition::Dirichlet,
            k,
        ))
        .unwrap()
    }

    #[test]
    fn dirichlet_energy_of_sine() {
        let disc = sine_space(8);
        let u = disc.mode(0, 0, 1.0);
        let v = assemble_functional(&catalog::p1(1).unwrap(), &disc, &u).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-10 * PI / 4.0);
        let v = assemble_functional(&catalog::p2(1).unwrap(), &disc, &u).unwrap();
        let want = PI / 4.0 + 3.0 * PI / 32.0;
        assert!((v - want).abs() < 1e-10 * want);
        let z = assemble_functional(&catalog::p2(1).unwrap(), &disc, &disc.zero()).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn gradient_of_sine_pairs_with_first_mode_only() {
        let disc = sine_space(8);
        let u = disc.mode(0, 0, 1.0);
        let g = assemble_gradient(&catalog::p1(1).unwrap(), &disc, &u).unwrap();
        for k in 0..8 {
            let want = if k == 0 { PI / 2.0 } else { 0.0 };
            assert!((g.dual[k] - want).abs() < 1e-12);
        }
        let z = assemble_gradient(&catalog::p2(1).unwrap(), &disc, &disc.zero()).unwrap();
        assert!(z.dual.iter().all(|v| *v == 0.0));
        assert!(z.riesz.iter().all(|v| *v == 0.0));
        for a in [0.3, 1.0, 2.0] {
            let u = disc.mode(0, 0, a);
            let g = assemble_gradient(&catalog::p2(1).unwrap(), &disc, &u).unwrap();
            let want = a * PI / 2.0 + a.powi(3) * 3.0 * PI / 8.0;
            assert!((g.dual[0] - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn linear_hessian_is_diagonal_in_sine_basis() {
        let disc = sine_space(16);
        let lag = catalog::p1(1).unwrap();
        let split = assemble_hessian(&lag, &disc, &disc.mode(0, 2, 0.7)).unwrap();
        for j in 0..16 {
            for k in 0..16 {
                let kk = (k + 1) as f64;
                let want = if j == k { kk * kk * PI / 2.0 } else { 0.0 };
                assert!((split.b[(j, k)] - want).abs() < 1e-10 * (1.0 + want));
            }
        }
        let (vals, _) = linalg::generalized_eigen(&split.b, disc.gram_cholesky());
        for (k, v) in vals.iter().enumerate() {
            let kk = (k + 1) as f64;
            assert!((v - kk * kk / (1.0 + kk * kk)).abs() < 1e-12);
        }
        let p3 = assemble_hessian(&catalog::p3(1).unwrap(), &disc, &disc.zero()).unwrap();
        assert!(linalg::max_abs(&(&p3.b - &split.b)) < 1e-12);
        let p2 = assemble_hessian(&catalog::p2(1).unwrap(), &disc, &disc.zero()).unwrap();
        assert!(linalg::max_abs(&(&p2.b - &split.b)) < 1e-12);
        let chk = split.check();
        assert!(chk.symmetric && chk.relative_defect < 1e-12);
    }

    #[test]
    fn non_hilbert_exponent_blocks_hessian() {
        let lag = catalog::p1(1)
            .unwrap()
            .with_growth(crate::lagrangian::GrowthSpec {
                p: 3.0,
                ..crate::lagrangian::GrowthSpec::quadratic()
            })
            .unwrap();
        let disc = sine_space(4);
        assert!(matches!(
            assemble_hessian(&lag, &disc, &disc.zero()),
            Err(VeldtError::Capability(_))
        ));
        assert!(assemble_gradient(&lag, &disc, &disc.zero()).is_ok());
    }
}
