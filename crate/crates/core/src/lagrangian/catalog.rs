//! Built-in scalar model integrands.

use std::sync::Arc;

use super::{enumerate_multi_indices, Envelope, GrowthSpec, Integrand, Lagrangian};
use crate::error::Result;

fn top_positions(n: usize, m: usize) -> Vec<usize> {
    let set = enumerate_multi_indices(n, m);
    set.indices()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.order() == m)
        .map(|(k, _)| k)
        .collect()
}

/// `½ Σ_{|α|=m} ξ_α² + ½ c ξ_0²`.
#[derive(Debug, Clone)]
pub struct DirichletEnergy {
    top: Vec<usize>,
    mass: f64,
}

impl DirichletEnergy {
    pub fn new(n: usize, m: usize, mass: f64) -> Self {
        Self {
            top: top_positions(n, m),
            mass,
        }
    }
}

impl Integrand for DirichletEnergy {
    fn value(&self, _x: &[f64], jet: &[f64]) -> f64 {
        0.5 * self.top.iter().map(|&k| jet[k] * jet[k]).sum::<f64>()
            + 0.5 * self.mass * jet[0] * jet[0]
    }

    fn gradient(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &k in &self.top {
            out[k] = jet[k];
        }
        out[0] += self.mass * jet[0];
    }

    fn hessian(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        let d = jet.len();
        out.fill(0.0);
        for &k in &self.top {
            out[k * d + k] = 1.0;
        }
        out[0] += self.mass;
    }
}

/// `½ Σ_i (ξ^i_0)²` over `components` components with `per` entries each.
#[derive(Debug, Clone)]
pub struct MassDensity {
    components: usize,
    per: usize,
}

impl MassDensity {
    pub fn new(components: usize, per: usize) -> Self {
        Self { components, per }
    }
}

impl Integrand for MassDensity {
    fn value(&self, _x: &[f64], jet: &[f64]) -> f64 {
        0.5 * (0..self.components)
            .map(|i| jet[i * self.per].powi(2))
            .sum::<f64>()
    }

    fn gradient(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.components {
            out[i * self.per] = jet[i * self.per];
        }
    }

    fn hessian(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        let d = jet.len();
        out.fill(0.0);
        for i in 0..self.components {
            let k = i * self.per;
            out[k * d + k] = 1.0;
        }
    }
}

/// `½ Σ_{|α|=m} ξ_α² + ¼ ξ_0⁴`.
#[derive(Debug, Clone)]
pub struct QuarticOnsite {
    top: Vec<usize>,
}

impl QuarticOnsite {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            top: top_positions(n, m),
        }
    }
}

impl Integrand for QuarticOnsite {
    fn value(&self, _x: &[f64], jet: &[f64]) -> f64 {
        0.5 * self.top.iter().map(|&k| jet[k] * jet[k]).sum::<f64>() + 0.25 * jet[0].powi(4)
    }

    fn gradient(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &k in &self.top {
            out[k] = jet[k];
        }
        out[0] += jet[0].powi(3);
    }

    fn hessian(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        let d = jet.len();
        out.fill(0.0);
        for &k in &self.top {
            out[k * d + k] = 1.0;
        }
        out[0] += 3.0 * jet[0] * jet[0];
    }
}

/// `½ (1 + ξ_0²) Σ_{|α|=m} ξ_α²`.
#[derive(Debug, Clone)]
pub struct StiffeningDirichlet {
    top: Vec<usize>,
}

impl StiffeningDirichlet {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            top: top_positions(n, m),
        }
    }
}

impl Integrand for StiffeningDirichlet {
    fn value(&self, _x: &[f64], jet: &[f64]) -> f64 {
        let q: f64 = self.top.iter().map(|&k| jet[k] * jet[k]).sum();
        0.5 * (1.0 + jet[0] * jet[0]) * q
    }

    fn gradient(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let q: f64 = self.top.iter().map(|&k| jet[k] * jet[k]).sum();
        let c = 1.0 + jet[0] * jet[0];
        for &k in &self.top {
            out[k] = c * jet[k];
        }
        out[0] = jet[0] * q;
    }

    fn hessian(&self, _x: &[f64], jet: &[f64], out: &mut [f64]) {
        let d = jet.len();
        out.fill(0.0);
        let q: f64 = self.top.iter().map(|&k| jet[k] * jet[k]).sum();
        let c = 1.0 + jet[0] * jet[0];
        out[0] = q;
        for &k in &self.top {
            out[k * d + k] = c;
            out[k] = 2.0 * jet[0] * jet[k];
            out[k * d] = 2.0 * jet[0] * jet[k];
        }
    }
}

fn constant_envelopes() -> GrowthSpec {
    GrowthSpec::quadratic().with_envelopes(
        Envelope::Constant { value: 1.0 },
        Envelope::Constant { value: 1.0 },
    )
}

/// `½ Σ_{|α|=m} ξ_α²`, the order-`m` Dirichlet energy.
pub fn dirichlet_only(n: usize, m: usize) -> Result<Lagrangian> {
    let growth = if n == 1 {
        constant_envelopes()
    } else {
        GrowthSpec::quadratic()
    };
    Lagrangian::new(
        "dirichlet",
        n,
        m,
        1,
        Arc::new(DirichletEnergy::new(n, m, 0.0)),
        growth,
    )
}

/// P1: `f = ½|∇u|²`.
pub fn p1(n: usize) -> Result<Lagrangian> {
    let lag = dirichlet_only(n, 1)?;
    Ok(lag.renamed("P1"))
}

/// Periodic variant of P1 with a mass term, `f = ½(ξ_1² + ξ_0²)`, so that the
/// Hessian at zero is invertible on the full periodic space.
pub fn p1_periodic() -> Result<Lagrangian> {
    let growth = GrowthSpec::quadratic().with_envelopes(
        Envelope::Constant { value: 1.0 },
        Envelope::Constant { value: 1.0 },
    );
    Lagrangian::new(
        "P1-periodic",
        1,
        1,
        1,
        Arc::new(DirichletEnergy::new(1, 1, 1.0)),
        growth,
    )
}

/// P2: `f = ½|∇u|² + ¼u⁴`.
pub fn p2(n: usize) -> Result<Lagrangian> {
    let growth = if n == 1 {
        GrowthSpec::quadratic().with_envelopes(
            Envelope::Power {
                scale: 3.0,
                power: 2.0,
            },
            Envelope::Constant { value: 1.0 },
        )
    } else {
        GrowthSpec {
            borderline_exponent: Some(8.0),
            ..GrowthSpec::quadratic()
        }
    };
    Lagrangian::new("P2", n, 1, 1, Arc::new(QuarticOnsite::new(n, 1)), growth)
}

/// P3: `f = ½(1 + u²)|∇u|²`.
pub fn p3(n: usize) -> Result<Lagrangian> {
    let growth = if n == 1 {
        GrowthSpec::quadratic().with_envelopes(
            Envelope::Power {
                scale: 2.0,
                power: 2.0,
            },
            Envelope::Constant { value: 1.0 },
        )
    } else {
        GrowthSpec::quadratic()
    };
    Lagrangian::new(
        "P3",
        n,
        1,
        1,
        Arc::new(StiffeningDirichlet::new(n, 1)),
        growth,
    )
}

/// P4: `f = ½(u″)²` on a line.
pub fn p4() -> Result<Lagrangian> {
    Ok(dirichlet_only(1, 2)?.renamed("P4"))
}

/// `g = ½|u|²` for a field with `components` components and derivatives up to order `m`.
pub fn mass(n: usize, m: usize, components: usize) -> Result<Lagrangian> {
    let per = enumerate_multi_indices(n, m).len();
    let growth = if n == 1 {
        GrowthSpec::quadratic().with_envelopes(
            Envelope::Constant { value: 1.0 },
            Envelope::Constant { value: 1.0 },
        )
    } else {
        GrowthSpec::quadratic()
    };
    Lagrangian::new(
        "mass",
        n,
        m,
        components,
        Arc::new(MassDensity::new(components, per)),
        growth,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{fd_jet_gradient, fd_jet_hessian};

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn catalog_derivatives_match_finite_differences() {
        let cases = vec![
            p1(1).unwrap(),
            p1(2).unwrap(),
            p2(1).unwrap(),
            p2(2).unwrap(),
            p3(1).unwrap(),
            p3(2).unwrap(),
            p4().unwrap(),
            p1_periodic().unwrap(),
            mass(1, 2, 1).unwrap(),
        ];
        for lag in cases {
            let f = lag.integrand().as_ref();
            for (s, jet) in lag.random_jets(5.0, 200, 42).iter().enumerate() {
                let x = [0.1 * s as f64];
                let d = lag.eval_jet_derivatives(&x, jet).unwrap();
                let fd = fd_jet_gradient(f, &x, jet.values(), 1e-5);
                for (a, b) in d.gradient.iter().zip(&fd) {
                    assert!(rel_err(*a, *b) < 1e-6, "{} grad {a} vs {b}", lag.name());
                }
                let fdh = fd_jet_hessian(f, &x, jet.values(), 1e-5);
                for (a, b) in d.hessian.iter().zip(&fdh) {
                    assert!(rel_err(*a, *b) < 1e-6, "{} hess {a} vs {b}", lag.name());
                }
                let k = lag.jet_dim();
                for i in 0..k {
                    for j in 0..k {
                        assert_eq!(d.hess(i, j), d.hess(j, i));
                    }
                }
            }
        }
    }
}
