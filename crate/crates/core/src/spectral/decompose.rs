use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{Result, VeldtError};
use crate::linalg;

/// Gram-generalized eigendecomposition of a symmetric form, split into
/// negative, null and positive parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Ascending eigenvalues of `B c = μ G c`.
    pub eigenvalues: Vec<f64>,
    /// Gram-orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
    pub morse_index: usize,
    pub nullity: usize,
    pub positive: usize,
    /// `|μ| ≤ threshold` counts as kernel.
    pub threshold: f64,
    /// Half the smallest non-kernel `|μ|`.
    pub gap: f64,
    gram: DMatrix<f64>,
}

/// Summary suitable for JSON export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub morse_index: usize,
    pub nullity: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    pub kernel_dim_hint: Option<usize>,
    /// Kernel threshold relative to the spectral radius.
    pub relative_threshold: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            kernel_dim_hint: None,
            relative_threshold: 1e-8,
        }
    }
}

/// Decomposes `B` in the geometry of `gram` with the default kernel threshold.
pub fn decompose(
    b: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    kernel_dim_hint: Option<usize>,
) -> Result<SpectralDecomposition> {
    let chol = linalg::cholesky(gram, "Gram matrix")?;
    decompose_with(
        b,
        gram,
        &chol,
        DecomposeOptions {
            kernel_dim_hint,
            ..DecomposeOptions::default()
        },
    )
}

pub fn decompose_with(
    b: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    chol: &Cholesky<f64, Dyn>,
    opts: DecomposeOptions,
) -> Result<SpectralDecomposition> {
    let (vals, vecs) = linalg::generalized_eigen(b, chol);
    let n = vals.len();
    let radius = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let base = opts.relative_threshold * radius;
    let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let threshold = match opts.kernel_dim_hint {
        None => base,
        Some(h) if h > n => {
            return Err(VeldtError::Configuration(format!(
                "kernel hint {h} exceeds dimension {n}"
            )))
        }
        Some(h) if h == n => mags.last().copied().unwrap_or(0.0).max(base),
        Some(h) => {
            let inner = if h == 0 { base } else { mags[h - 1].max(base) };
            let next = mags[h];
            if next < 10.0 * inner {
                return Err(VeldtError::DegeneracyResolution {
                    hint: h,
                    threshold: inner,
                    next,
                });
            }
            (inner * next).sqrt()
        }
    };
    let mut morse_index = 0;
    let mut nullity = 0;
    let mut positive = 0;
    let mut smallest_outside = f64::INFINITY;
    for v in vals.iter() {
        if v.abs() <= threshold {
            nullity += 1;
        } else {
            smallest_outside = smallest_outside.min(v.abs());
            if *v < 0.0 {
                morse_index += 1;
            } else {
                positive += 1;
            }
        }
    }
    let gap = if smallest_outside.is_finite() {
        0.5 * smallest_outside
    } else {
        0.0
    };
    Ok(SpectralDecomposition {
        eigenvalues: vals.iter().copied().collect(),
        eigenvectors: vecs,
        morse_index,
        nullity,
        positive,
        threshold,
        gap,
        gram: gram.clone(),
    })
}

impl SpectralDecomposition {
    fn columns(&self, range: std::ops::Range<usize>) -> DMatrix<f64> {
        self.eigenvectors
            .columns(range.start, range.len())
            .into_owned()
    }

    fn ranges(&self) -> [std::ops::Range<usize>; 3] {
        // Eigenvalues are ascending, so the three classes are contiguous.
        let neg = self.morse_index;
        let null = neg + self.nullity;
        [0..neg, neg..null, null..self.eigenvalues.len()]
    }

    pub fn negative_basis(&self) -> DMatrix<f64> {
        self.columns(self.ranges()[0].clone())
    }

    pub fn kernel_basis(&self) -> DMatrix<f64> {
        self.columns(self.ranges()[1].clone())
    }

    pub fn positive_basis(&self) -> DMatrix<f64> {
        self.columns(self.ranges()[2].clone())
    }

    fn projector(&self, v: DMatrix<f64>) -> DMatrix<f64> {
        &v * v.transpose() * &self.gram
    }

    /// `P⁻ = V₋V₋ᵀG`.
    pub fn projector_negative(&self) -> DMatrix<f64> {
        self.projector(self.negative_basis())
    }

    pub fn projector_kernel(&self) -> DMatrix<f64> {
        self.projector(self.kernel_basis())
    }

    pub fn projector_positive(&self) -> DMatrix<f64> {
        self.projector(self.positive_basis())
    }

    pub fn summary(&self) -> SpectrumSummary {
        let mut eigenvalues = Vec::new();
        let mut multiplicities = Vec::new();
        for v in &self.eigenvalues {
            match eigenvalues.last() {
                Some(last) if crate::spectral::same_group(*last, *v) => {
                    *multiplicities.last_mut().unwrap() += 1;
                }
                _ => {
                    eigenvalues.push(*v);
                    multiplicities.push(1);
                }
            }
        }
        SpectrumSummary {
            eigenvalues,
            multiplicities,
            morse_index: self.morse_index,
            nullity: self.nullity,
            gap: self.gap,
        }
    }

    /// Coordinates of `v` along the eigenvectors: `Vᵀ G v`.
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        self.eigenvectors.transpose() * (&self.gram * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hint_resolves_near_kernel() {
        let g = DMatrix::identity(4, 4);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1e-6, 2.0, 3.0]));
        let d = decompose(&b, &g, None).unwrap();
        assert_eq!((d.morse_index, d.nullity, d.positive), (1, 0, 3));
        let d = decompose(&b, &g, Some(1)).unwrap();
        assert_eq!((d.morse_index, d.nullity, d.positive), (1, 1, 2));
        assert!(d.threshold > 1e-6 && d.threshold < 1.0);
        assert!(matches!(
            decompose(&b, &g, Some(2)),
            Err(VeldtError::DegeneracyResolution { .. })
        ));
    }

    #[test]
    fn projectors_partition_identity() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.1, 0.0, 0.1, 1.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let d = decompose(&b, &g, None).unwrap();
        let sum = d.projector_negative() + d.projector_kernel() + d.projector_positive();
        assert!((sum - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        assert_eq!(d.morse_index + d.nullity + d.positive, 3);
    }
}
