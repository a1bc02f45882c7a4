use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VeldtError};
use crate::galerkin::{
    assemble_dual_gradient, assemble_functional, assemble_hessian_matrix, Discretization,
};
use crate::lagrangian::Lagrangian;

/// A twice differentiable functional on the coefficient space of a discretization.
///
/// Gradients and Hessians are in dual coordinates; the Riesz gradient is `G⁻¹ℓ`.
pub trait Functional: Send + Sync {
    fn disc(&self) -> &Discretization;
    fn value(&self, u: &DVector<f64>) -> Result<f64>;
    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>>;
    fn hessian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>>;

    fn dim(&self) -> usize {
        self.disc().dim()
    }
}

/// The parameterized family `𝓛_λ⃗ = 𝓕 − Σ λ_j 𝓖_j` on one discretization.
#[derive(Debug, Clone)]
pub struct ParamFunctional {
    f: Lagrangian,
    g: Vec<Lagrangian>,
    disc: Discretization,
}

impl ParamFunctional {
    pub fn new(f: Lagrangian, g: Vec<Lagrangian>, disc: Discretization) -> Result<Self> {
        if g.is_empty() {
            return Err(VeldtError::Configuration(
                "at least one parameter functional is required".into(),
            ));
        }
        for lag in std::iter::once(&f).chain(&g) {
            if lag.n() != disc.n() || lag.m() != disc.m() || lag.components() != disc.components() {
                return Err(VeldtError::Configuration(format!(
                    "functional {} has (n, m, N) = ({}, {}, {}) but the space has ({}, {}, {})",
                    lag.name(),
                    lag.n(),
                    lag.m(),
                    lag.components(),
                    disc.n(),
                    disc.m(),
                    disc.components()
                )));
            }
        }
        Ok(Self { f, g, disc })
    }

    pub fn principal(&self) -> &Lagrangian {
        &self.f
    }

    pub fn parameters(&self) -> &[Lagrangian] {
        &self.g
    }

    pub fn n_params(&self) -> usize {
        self.g.len()
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    fn check_lambda(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.g.len() {
            return Err(VeldtError::Configuration(format!(
                "expected {} parameters, got {}",
                self.g.len(),
                lambda.len()
            )));
        }
        Ok(())
    }

    pub fn value(&self, lambda: &[f64], u: &DVector<f64>) -> Result<f64> {
        self.check_lambda(lambda)?;
        let mut v = assemble_functional(&self.f, &self.disc, u)?;
        for (l, g) in lambda.iter().zip(&self.g) {
            if *l != 0.0 {
                v -= l * assemble_functional(g, &self.disc, u)?;
            }
        }
        Ok(v)
    }

    pub fn gradient(&self, lambda: &[f64], u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_lambda(lambda)?;
        let mut v = assemble_dual_gradient(&self.f, &self.disc, u)?;
        for (l, g) in lambda.iter().zip(&self.g) {
            if *l != 0.0 {
                v.axpy(-l, &assemble_dual_gradient(g, &self.disc, u)?, 1.0);
            }
        }
        Ok(v)
    }

    pub fn hessian(&self, lambda: &[f64], u: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_lambda(lambda)?;
        let mut h = assemble_hessian_matrix(&self.f, &self.disc, u)?;
        for (l, g) in lambda.iter().zip(&self.g) {
            if *l != 0.0 {
                h -= assemble_hessian_matrix(g, &self.disc, u)? * *l;
            }
        }
        Ok(h)
    }

    pub fn f_hessian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        assemble_hessian_matrix(&self.f, &self.disc, u)
    }

    pub fn g_hessians(&self, u: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        self.g
            .iter()
            .map(|g| assemble_hessian_matrix(g, &self.disc, u))
            .collect()
    }

    /// Dual norms of `𝓕′(u)` and each `𝓖′_j(u)`.
    pub fn criticality(&self, u: &DVector<f64>) -> Result<(f64, Vec<f64>)> {
        let f = self
            .disc
            .dual_norm(&assemble_dual_gradient(&self.f, &self.disc, u)?);
        let g = self
            .g
            .iter()
            .map(|g| {
                Ok(self
                    .disc
                    .dual_norm(&assemble_dual_gradient(g, &self.disc, u)?))
            })
            .collect::<Result<_>>()?;
        Ok((f, g))
    }

    /// Fixes the parameters.
    pub fn at(&self, lambda: &[f64]) -> Result<AtLambda<'_>> {
        self.check_lambda(lambda)?;
        Ok(AtLambda {
            family: self,
            lambda: lambda.to_vec(),
        })
    }
}

/// `𝓛_λ⃗` for one fixed `λ⃗`.
#[derive(Debug, Clone)]
pub struct AtLambda<'a> {
    family: &'a ParamFunctional,
    lambda: Vec<f64>,
}

impl AtLambda<'_> {
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
}

impl Functional for AtLambda<'_> {
    fn disc(&self) -> &Discretization {
        &self.family.disc
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        self.family.value(&self.lambda, u)
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.family.gradient(&self.lambda, u)
    }

    fn hessian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.family.hessian(&self.lambda, u)
    }
}
