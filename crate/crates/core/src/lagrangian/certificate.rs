use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Jet, Lagrangian};
use crate::error::{Result, VeldtError};
use crate::galerkin::{assemble_functional, Discretization};

/// Sufficient conditions for the Palais–Smale and Cerami conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsMode {
    /// `𝓕(u) → ∞` as `‖u‖ → ∞`, probed along rays of the discrete space.
    Coercive,
    /// `F − κ Σ F_α ξ_α ≥ c₀ Σ_{|α|=m}|ξ_α|^p − c₁ Σ|ξ_0|^p − Υ` with `c₀ − c₁Ŝ > 0`.
    EnergyInequality,
    /// `F(x, ξ̂, 0) ≤ φ + C Σ_{|α|<m} |ξ_α|^r` with `1 ≤ r < 2`.
    BoundedSlice,
}

/// Inputs for [`ps_certificate`]; unused fields are ignored by the chosen mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsParams {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    /// Upper bound for `Υ`.
    #[serde(default)]
    pub upsilon: f64,
    /// Discrete Sobolev constant `Ŝ`.
    #[serde(default)]
    pub sobolev: Option<f64>,
    /// Upper bound for `φ`.
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Jet radius and count for the generated sample set.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_r() -> f64 {
    1.0
}

fn default_radius() -> f64 {
    5.0
}

fn default_count() -> usize {
    500
}

fn default_rays() -> usize {
    16
}

impl Default for PsParams {
    fn default() -> Self {
        Self {
            kappa: 0.0,
            c0: 0.0,
            c1: 0.0,
            upsilon: 0.0,
            sobolev: None,
            phi: 0.0,
            c: 0.0,
            r: default_r(),
            radius: default_radius(),
            count: default_count(),
            rays: default_rays(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsReport {
    pub mode: PsMode,
    pub passed: bool,
    /// Positive when the certificate holds; its meaning depends on the mode.
    pub margin: f64,
    /// Smallest slack of the pointwise inequality over the samples, if any.
    pub pointwise_margin: Option<f64>,
    pub witness: Option<Vec<f64>>,
    pub note: String,
}

fn sample_set(lag: &Lagrangian, params: &PsParams) -> Vec<(Vec<f64>, Jet)> {
    let x = vec![0.0; lag.n()];
    let mut jets = lag.random_jets(params.radius, params.count, params.seed);
    jets.push(lag.zero_jet());
    jets.into_iter().map(|j| (x.clone(), j)).collect()
}

/// Checks one of the sufficient conditions on samples (and rays for the coercive mode).
pub fn ps_certificate(
    lag: &Lagrangian,
    mode: PsMode,
    params: &PsParams,
    disc: Option<&Discretization>,
) -> Result<PsReport> {
    let p = lag.growth().p;
    let per = lag.indices().len();
    let order = |k: usize| lag.indices().indices()[k % per].order();
    match mode {
        PsMode::Coercive => {
            let disc = disc.ok_or_else(|| {
                VeldtError::Dependency("coercive mode needs a discretization to probe rays".into())
            })?;
            let scales = [1.0, 2.0, 4.0, 8.0, 16.0];
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let mut margin = f64::INFINITY;
            let mut increasing = true;
            let mut witness = None;
            for _ in 0..params.rays.max(1) {
                let v = disc.random_field(&mut rng, 1.0);
                let mut prev = f64::NEG_INFINITY;
                for s in scales {
                    let val = assemble_functional(lag, disc, &(&v * s))?;
                    if val <= prev {
                        increasing = false;
                        witness.get_or_insert_with(|| v.iter().copied().collect());
                    }
                    prev = val;
                }
                let last = scales[scales.len() - 1];
                let ratio = prev / (last * last);
                if ratio < margin {
                    margin = ratio;
                    if increasing {
                        witness = Some(v.iter().copied().collect());
                    }
                }
            }
            Ok(PsReport {
                mode,
                passed: increasing && margin > 0.0,
                margin,
                pointwise_margin: None,
                witness: if increasing && margin > 0.0 {
                    None
                } else {
                    witness
                },
                note: "growth along sampled rays of the discrete space; evidence, not a proof"
                    .into(),
            })
        }
        PsMode::EnergyInequality => {
            let mut worst = f64::INFINITY;
            let mut witness = None;
            for (x, jet) in sample_set(lag, params) {
                let d = lag.eval_jet_derivatives(&x, &jet)?;
                let v = jet.values();
                let euler: f64 = d.gradient.iter().zip(v).map(|(g, xi)| g * xi).sum();
                let lhs = d.value - params.kappa * euler;
                let top: f64 = (0..v.len())
                    .filter(|&k| order(k) == lag.m())
                    .map(|k| v[k].abs().powf(p))
                    .sum();
                let zero: f64 = (0..lag.components())
                    .map(|i| v[i * per].abs().powf(p))
                    .sum();
                let rhs = params.c0 * top - params.c1 * zero - params.upsilon;
                if lhs - rhs < worst {
                    worst = lhs - rhs;
                    witness = Some(v.to_vec());
                }
            }
            let s = params.sobolev.ok_or_else(|| {
                VeldtError::Dependency(
                    "energy inequality mode needs the Sobolev constant; run estimate_sobolev_constant first"
                        .into(),
                )
            })?;
            let margin = params.c0 - params.c1 * s;
            let pointwise_ok = worst >= -1e-12;
            let passed = pointwise_ok && params.c0 > 0.0 && margin > 0.0;
            Ok(PsReport {
                mode,
                passed,
                margin,
                pointwise_margin: Some(worst),
                witness: if pointwise_ok { None } else { witness },
                note: "pointwise inequality sampled; constant comparison uses the discrete Sobolev estimate"
                    .into(),
            })
        }
        PsMode::BoundedSlice => {
            if !(params.r >= 1.0 && params.r < 2.0) {
                return Err(VeldtError::Configuration(format!(
                    "exponent r must satisfy 1 ≤ r < 2, got {}",
                    params.r
                )));
            }
            let mut worst = f64::INFINITY;
            let mut witness = None;
            for (x, jet) in sample_set(lag, params) {
                let mut v = jet.values().to_vec();
                for (k, e) in v.iter_mut().enumerate() {
                    if order(k) == lag.m() {
                        *e = 0.0;
                    }
                }
                let f = lag.integrand().value(&x, &v);
                let rhs =
                    params.phi + params.c * v.iter().map(|e| e.abs().powf(params.r)).sum::<f64>();
                if rhs - f < worst {
                    worst = rhs - f;
                    witness = Some(v);
                }
            }
            let passed = worst >= -1e-12;
            Ok(PsReport {
                mode,
                passed,
                margin: worst,
                pointwise_margin: Some(worst),
                witness: if passed { None } else { witness },
                note: "zero-slice bound sampled on jets; requires p = 2 and a constant ellipticity envelope"
                    .into(),
            })
        }
    }
}
