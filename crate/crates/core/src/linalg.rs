//! Dense helpers for the Gram-weighted geometry.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Result, VeldtError};

/// `sqrt(vᵀ G v)`.
pub fn gram_norm(gram: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    gram_dot(gram, v, v).max(0.0).sqrt()
}

/// `uᵀ G v`.
pub fn gram_dot(gram: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(&(gram * v))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn cholesky(a: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(a))
        .ok_or_else(|| VeldtError::Discretization(format!("{what} is not positive definite")))
}

/// Eigenpairs of `A v = μ G v` for symmetric `A` and SPD `G`, ascending, with `VᵀGV = I`.
pub fn generalized_eigen(a: &DMatrix<f64>, g: &Cholesky<f64, Dyn>) -> (DVector<f64>, DMatrix<f64>) {
    let l = g.l();
    let n = a.nrows();
    // C = L⁻¹ A L⁻ᵀ
    let mut x = symmetrize(a);
    if !l.solve_lower_triangular_mut(&mut x) {
        return (DVector::zeros(n), DMatrix::zeros(n, n));
    }
    let mut c = x.transpose();
    l.solve_lower_triangular_mut(&mut c);
    let eig = SymmetricEigen::new(symmetrize(&c));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut y = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        // Deterministic sign: largest-magnitude entry positive.
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v.neg_mut();
        }
        y.set_column(col, &v);
    }
    let lt = l.transpose();
    lt.solve_upper_triangular_mut(&mut y);
    (vals, y)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Gram-orthonormalizes the columns of `v` (modified Gram–Schmidt, twice).
pub fn gram_orthonormalize(gram: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = v.clone();
    for _ in 0..2 {
        for j in 0..out.ncols() {
            let mut col = out.column(j).into_owned();
            for i in 0..j {
                let prev = out.column(i).into_owned();
                let c = gram_dot(gram, &prev, &col);
                col -= prev * c;
            }
            let nrm = gram_norm(gram, &col);
            if nrm > 0.0 {
                col /= nrm;
            }
            out.set_column(j, &col);
        }
    }
    out
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Signature of a symmetric matrix: (negative, zero, positive) counts at relative tolerance `tol`.
pub fn inertia(a: &DMatrix<f64>, tol: f64) -> (usize, usize, usize) {
    let vals = sym_eigenvalues(a);
    let scale = vals
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut counts = (0, 0, 0);
    for v in vals {
        if v < -tol * scale {
            counts.0 += 1;
        } else if v > tol * scale {
            counts.2 += 1;
        } else {
            counts.1 += 1;
        }
    }
    counts
}
