//! Integrands `f(x, ξ)` over jets of order `m`, their first and second
//! partial derivatives in the jet variables, and the growth hypotheses that
//! make the associated integral functional well behaved on `W^{m,p}`.
//!
//! A jet `ξ` collects `ξ^i_α` for every component `i < N` and multi-index
//! `|α| ≤ m`. Storage is component-major: entry `i·M(m) + a` holds the value
//! for component `i` and the `a`-th multi-index of [`enumerate_multi_indices`].

pub mod catalog;
mod certificate;
mod growth;
mod multi_index;
mod polynomial;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VeldtError};

pub use catalog::{DirichletEnergy, MassDensity, QuarticOnsite, StiffeningDirichlet};
pub use certificate::{ps_certificate, PsMode, PsParams, PsReport};
pub use growth::{
    check_growth, Envelope, GrowthExponents, GrowthReport, GrowthSpec, InteractionOverride,
    SampleRatios,
};
pub use multi_index::{enumerate_multi_indices, MultiIndex, MultiIndexSet};
pub use polynomial::{Monomial, Polynomial, PolynomialIntegrand};

/// Pointwise integrand with analytic jet derivatives.
///
/// `jet` has length `N·M(m)`; `gradient` writes the same number of entries and
/// `hessian` writes a row-major square of that size.
pub trait Integrand: Send + Sync + std::fmt::Debug {
    fn value(&self, x: &[f64], jet: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], jet: &[f64], out: &mut [f64]);
    fn hessian(&self, x: &[f64], jet: &[f64], out: &mut [f64]);
}

/// Values `ξ^i_α` of a function and its derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    components: usize,
    per_component: usize,
    values: Vec<f64>,
}

impl Jet {
    pub fn zeros(components: usize, per_component: usize) -> Self {
        Self {
            components,
            per_component,
            values: vec![0.0; components * per_component],
        }
    }

    pub fn from_values(components: usize, per_component: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != components * per_component {
            return Err(VeldtError::Configuration(format!(
                "jet needs {} values, got {}",
                components * per_component,
                values.len()
            )));
        }
        Ok(Self {
            components,
            per_component,
            values,
        })
    }

    pub fn get(&self, component: usize, index: usize) -> f64 {
        self.values[component * self.per_component + index]
    }

    pub fn set(&mut self, component: usize, index: usize, value: f64) {
        self.values[component * self.per_component + index] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn per_component(&self) -> usize {
        self.per_component
    }

    /// `ξ_∘`: entries with `|α| < m − n/p`, per component.
    pub fn circ(&self, indices: &MultiIndexSet, p: f64) -> Vec<Vec<f64>> {
        let cut = indices.m() as f64 - indices.n() as f64 / p;
        (0..self.components)
            .map(|i| {
                indices
                    .indices()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| (a.order() as f64) < cut)
                    .map(|(k, _)| self.get(i, k))
                    .collect()
            })
            .collect()
    }

    /// `Σ_i |ξ^i_∘|` with the Euclidean norm per component.
    pub fn circ_norm(&self, indices: &MultiIndexSet, p: f64) -> f64 {
        self.circ(indices, p)
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum()
    }
}

/// Value, gradient and (exactly symmetric) Hessian of an integrand at a jet.
#[derive(Debug, Clone, PartialEq)]
pub struct JetDerivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major, `dim × dim` with `dim = N·M(m)`.
    pub hessian: Vec<f64>,
}

impl JetDerivatives {
    pub fn hess(&self, a: usize, b: usize) -> f64 {
        self.hessian[a * self.gradient.len() + b]
    }
}

/// An integrand together with its dimensions and declared growth data.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    name: String,
    n: usize,
    m: usize,
    components: usize,
    indices: MultiIndexSet,
    integrand: Arc<dyn Integrand>,
    growth: GrowthSpec,
}

impl Lagrangian {
    /// Builds a Lagrangian after validating the growth data.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        components: usize,
        integrand: Arc<dyn Integrand>,
        growth: GrowthSpec,
    ) -> Result<Self> {
        if n == 0 || m == 0 || components == 0 {
            return Err(VeldtError::Configuration(
                "n, m and N must all be positive".into(),
            ));
        }
        let indices = enumerate_multi_indices(n, m);
        growth.resolve(&indices)?;
        Ok(Self {
            name: name.into(),
            n,
            m,
            components,
            indices,
            integrand,
            growth,
        })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.indices
    }

    /// Number of jet variables `N·M(m)`.
    pub fn jet_dim(&self) -> usize {
        self.components * self.indices.len()
    }

    pub fn integrand(&self) -> &Arc<dyn Integrand> {
        &self.integrand
    }

    pub fn growth(&self) -> &GrowthSpec {
        &self.growth
    }

    pub fn with_growth(mut self, growth: GrowthSpec) -> Result<Self> {
        growth.resolve(&self.indices)?;
        self.growth = growth;
        Ok(self)
    }

    pub fn zero_jet(&self) -> Jet {
        Jet::zeros(self.components, self.indices.len())
    }

    fn entry_label(&self, k: usize) -> String {
        let per = self.indices.len();
        format!(
            "component {} alpha {}",
            k / per,
            self.indices.indices()[k % per]
        )
    }

    /// Evaluates `f`, all `f^i_α`, and all `f^{ij}_{αβ}` at `(x, ξ)`.
    pub fn eval_jet_derivatives(&self, x: &[f64], jet: &Jet) -> Result<JetDerivatives> {
        let dim = self.jet_dim();
        if jet.values().len() != dim {
            return Err(VeldtError::Configuration(format!(
                "jet has {} entries, Lagrangian expects {dim}",
                jet.values().len()
            )));
        }
        let value = self.integrand.value(x, jet.values());
        if !value.is_finite() {
            return Err(VeldtError::Evaluation {
                what: "integrand value",
                x: x.to_vec(),
                entry: "f".into(),
            });
        }
        let mut gradient = vec![0.0; dim];
        self.integrand.gradient(x, jet.values(), &mut gradient);
        if let Some(k) = gradient.iter().position(|g| !g.is_finite()) {
            return Err(VeldtError::Evaluation {
                what: "first derivative",
                x: x.to_vec(),
                entry: self.entry_label(k),
            });
        }
        let mut hessian = vec![0.0; dim * dim];
        self.integrand.hessian(x, jet.values(), &mut hessian);
        if let Some(k) = hessian.iter().position(|h| !h.is_finite()) {
            return Err(VeldtError::Evaluation {
                what: "second derivative",
                x: x.to_vec(),
                entry: format!(
                    "{} / {}",
                    self.entry_label(k / dim),
                    self.entry_label(k % dim)
                ),
            });
        }
        for a in 0..dim {
            for b in a + 1..dim {
                let s = 0.5 * (hessian[a * dim + b] + hessian[b * dim + a]);
                hessian[a * dim + b] = s;
                hessian[b * dim + a] = s;
            }
        }
        Ok(JetDerivatives {
            value,
            gradient,
            hessian,
        })
    }

    /// Random jets with entries uniform in `[-radius, radius]`.
    pub fn random_jets(&self, radius: f64, count: usize, seed: u64) -> Vec<Jet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let values = (0..self.jet_dim())
                    .map(|_| rng.gen_range(-radius..=radius))
                    .collect();
                Jet {
                    components: self.components,
                    per_component: self.indices.len(),
                    values,
                }
            })
            .collect()
    }

    /// Tensor grid of jets with `per_axis` points per entry in `[-radius, radius]`.
    pub fn grid_jets(&self, radius: f64, per_axis: usize) -> Vec<Jet> {
        let dim = self.jet_dim();
        let per_axis = per_axis.max(2);
        let axis: Vec<f64> = (0..per_axis)
            .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
            .collect();
        let total = per_axis.pow(dim as u32);
        (0..total)
            .map(|mut idx| {
                let values = (0..dim)
                    .map(|_| {
                        let v = axis[idx % per_axis];
                        idx /= per_axis;
                        v
                    })
                    .collect();
                Jet {
                    components: self.components,
                    per_component: self.indices.len(),
                    values,
                }
            })
            .collect()
    }
}

/// Central finite-difference oracle for the jet gradient of an integrand.
pub fn fd_jet_gradient(integrand: &dyn Integrand, x: &[f64], jet: &[f64], h: f64) -> Vec<f64> {
    let mut probe = jet.to_vec();
    (0..jet.len())
        .map(|k| {
            probe[k] = jet[k] + h;
            let plus = integrand.value(x, &probe);
            probe[k] = jet[k] - h;
            let minus = integrand.value(x, &probe);
            probe[k] = jet[k];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Central finite-difference oracle for the jet Hessian (differences of the gradient).
pub fn fd_jet_hessian(integrand: &dyn Integrand, x: &[f64], jet: &[f64], h: f64) -> Vec<f64> {
    let dim = jet.len();
    let mut probe = jet.to_vec();
    let mut gp = vec![0.0; dim];
    let mut gm = vec![0.0; dim];
    let mut out = vec![0.0; dim * dim];
    for b in 0..dim {
        probe[b] = jet[b] + h;
        integrand.gradient(x, &probe, &mut gp);
        probe[b] = jet[b] - h;
        integrand.gradient(x, &probe, &mut gm);
        probe[b] = jet[b];
        for a in 0..dim {
            out[a * dim + b] = (gp[a] - gm[a]) / (2.0 * h);
        }
    }
    out
}
