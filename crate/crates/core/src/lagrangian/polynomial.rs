use serde::{Deserialize, Serialize};

use super::Integrand;
use crate::error::{Result, VeldtError};

/// `coef · Π_k ξ_k^{powers[k]}` over the flattened jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    fn eval(&self, jet: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(jet)
            .filter(|(p, _)| **p > 0)
            .fold(self.coef, |acc, (p, v)| acc * v.powi(*p as i32))
    }
}

/// Sum of monomials in the jet variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn eval(&self, jet: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(jet)).sum()
    }

    /// Exact partial derivative in variable `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[var] > 0 && t.coef != 0.0)
            .map(|t| {
                let mut powers = t.powers.clone();
                let p = powers[var];
                powers[var] -= 1;
                Monomial {
                    coef: t.coef * p as f64,
                    powers,
                }
            })
            .collect();
        Polynomial { terms }
    }
}

/// Polynomial integrand with symbolically precomputed first and second derivatives.
#[derive(Debug, Clone)]
pub struct PolynomialIntegrand {
    dim: usize,
    f: Polynomial,
    grad: Vec<Polynomial>,
    hess: Vec<Polynomial>,
}

impl PolynomialIntegrand {
    pub fn new(dim: usize, f: Polynomial) -> Result<Self> {
        for t in &f.terms {
            if t.powers.len() != dim {
                return Err(VeldtError::Configuration(format!(
                    "monomial has {} powers, jet has {dim} entries",
                    t.powers.len()
                )));
            }
            if !t.coef.is_finite() {
                return Err(VeldtError::Configuration(
                    "monomial coefficient not finite".into(),
                ));
            }
        }
        let grad: Vec<Polynomial> = (0..dim).map(|k| f.derivative(k)).collect();
        let mut hess = vec![Polynomial::default(); dim * dim];
        for a in 0..dim {
            for b in a..dim {
                let d = grad[a].derivative(b);
                hess[b * dim + a] = d.clone();
                hess[a * dim + b] = d;
            }
        }
        Ok(Self { dim, f, grad, hess })
    }

    pub fn from_terms(dim: usize, terms: &[(f64, Vec<u32>)]) -> Result<Self> {
        let f = Polynomial {
            terms: terms
                .iter()
                .map(|(coef, powers)| Monomial {
                    coef: *coef,
                    powers: powers.clone(),
                })
                .collect(),
        };
        Self::new(dim, f)
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.f
    }
}

impl Integrand for PolynomialIntegrand {
    fn value(&self, _x: &[f64], jet: &[f64]) -> f64 {
        self.f.eval(jet)
    }

    fn gradient(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.grad) {
            *o = g.eval(jet);
        }
    }

    fn hessian(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim * self.dim);
        for (o, h) in out.iter_mut().zip(&self.hess) {
            *o = h.eval(jet);
        }
    }
}
