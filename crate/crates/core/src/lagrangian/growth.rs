use serde::{Deserialize, Serialize};

use super::{Jet, Lagrangian, MultiIndexSet};
use crate::error::{Result, VeldtError};

/// A positive nondecreasing function on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Constant {
        value: f64,
    },
    /// `scale · (1 + t)^power`.
    Power {
        scale: f64,
        power: f64,
    },
    /// `Σ c_i t^i` with nonnegative coefficients and `c_0 > 0`.
    Polynomial {
        coefs: Vec<f64>,
    },
    /// Right-continuous step function: `values[i]` on `[breaks[i], breaks[i+1])`,
    /// `values[0]` below the first break.
    Step {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Constant { value } => *value,
            Envelope::Power { scale, power } => scale * (1.0 + t).powf(*power),
            Envelope::Polynomial { coefs } => coefs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Envelope::Step { breaks, values } => {
                let k = breaks.partition_point(|b| *b <= t);
                values[k.saturating_sub(1)]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(VeldtError::Configuration(format!("envelope: {msg}")));
        match self {
            Envelope::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                bad("constant must be positive")
            }
            Envelope::Power { scale, power } if !(*scale > 0.0 && *power >= 0.0) => {
                bad("power envelope needs scale > 0 and power ≥ 0")
            }
            Envelope::Polynomial { coefs }
                if coefs.is_empty() || coefs[0] <= 0.0 || coefs.iter().any(|c| *c < 0.0) =>
            {
                bad("polynomial envelope needs c_0 > 0 and nonnegative coefficients")
            }
            Envelope::Step { breaks, values } => {
                if breaks.is_empty() || breaks.len() != values.len() {
                    return bad("step envelope needs matching nonempty breaks and values");
                }
                if breaks.windows(2).any(|w| w[1] < w[0]) {
                    return bad("step breaks must be sorted");
                }
                if values.iter().any(|v| *v <= 0.0) || values.windows(2).any(|w| w[1] < w[0]) {
                    return bad("step values must be positive and nondecreasing");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Explicit choice of an interaction exponent `p_{αβ}` in the open-interval regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionOverride {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub value: f64,
}

/// Declared growth data: `p`, the envelopes and optional exponent choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSpec {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<Envelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<Envelope>,
    /// `p_γ` for `|γ| = m − n/p`; defaults to `2p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub borderline_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interaction: Vec<InteractionOverride>,
}

impl GrowthSpec {
    /// `p = 2` with envelopes left to be fitted from samples.
    pub fn quadratic() -> Self {
        Self {
            p: 2.0,
            g1: None,
            g2: None,
            borderline_exponent: None,
            interaction: Vec::new(),
        }
    }

    pub fn with_envelopes(mut self, g1: Envelope, g2: Envelope) -> Self {
        self.g1 = Some(g1);
        self.g2 = Some(g2);
        self
    }

    /// Validates the data and computes all exponents for the given index set.
    pub fn resolve(&self, indices: &MultiIndexSet) -> Result<GrowthExponents> {
        let p = self.p;
        if !(p >= 2.0 && p.is_finite()) {
            return Err(VeldtError::Configuration(format!("p must be ≥ 2, got {p}")));
        }
        for env in self.g1.iter().chain(self.g2.iter()) {
            env.validate()?;
        }
        let n = indices.n() as f64;
        let m = indices.m() as f64;
        let cut = m - n / p;
        let borderline = self.borderline_exponent.unwrap_or(2.0 * p);
        if !(borderline > 1.0 && borderline.is_finite()) {
            return Err(VeldtError::Configuration(format!(
                "borderline exponent must lie in (1, ∞), got {borderline}"
            )));
        }
        let eps = 1e-12;
        let mut p_gamma = Vec::with_capacity(indices.len());
        let mut q_gamma = Vec::with_capacity(indices.len());
        let mut upper = Vec::with_capacity(indices.len());
        for a in indices.indices() {
            let k = a.order() as f64;
            if k < cut - eps {
                p_gamma.push(None);
                q_gamma.push(1.0);
                upper.push(false);
            } else {
                let pg = if (k - cut).abs() <= eps {
                    borderline
                } else {
                    n * p / (n - (m - k) * p)
                };
                p_gamma.push(Some(pg));
                q_gamma.push(pg / (pg - 1.0));
                upper.push(true);
            }
        }
        let len = indices.len();
        let mut p_ab = vec![0.0; len * len];
        let mut strict = vec![false; len * len];
        let inv = |g: Option<f64>| g.map_or(0.0, |v| 1.0 / v);
        let top = indices.m();
        for a in 0..len {
            for b in 0..len {
                let oa = indices.indices()[a].order();
                let ob = indices.indices()[b].order();
                let bound = 1.0 - inv(p_gamma[a]) - inv(p_gamma[b]);
                let v = if oa == top && ob == top {
                    bound
                } else if upper[a] && !upper[b] {
                    1.0 - inv(p_gamma[a])
                } else if !upper[a] && upper[b] {
                    1.0 - inv(p_gamma[b])
                } else if !upper[a] && !upper[b] {
                    1.0
                } else {
                    strict[a * len + b] = true;
                    0.5 * bound
                };
                p_ab[a * len + b] = v;
            }
        }
        for ov in &self.interaction {
            let find = |e: &Vec<usize>| {
                indices
                    .indices()
                    .iter()
                    .position(|a| a.entries() == e.as_slice())
                    .ok_or_else(|| {
                        VeldtError::Configuration(format!(
                            "unknown multi-index {e:?} in interaction"
                        ))
                    })
            };
            let a = find(&ov.alpha)?;
            let b = find(&ov.beta)?;
            if !strict[a * len + b] {
                return Err(VeldtError::Configuration(format!(
                    "p_αβ for {:?},{:?} is fixed by the hypothesis and cannot be overridden",
                    ov.alpha, ov.beta
                )));
            }
            let bound = 1.0 - inv(p_gamma[a]) - inv(p_gamma[b]);
            if !(ov.value > 0.0 && ov.value < bound) {
                return Err(VeldtError::Configuration(format!(
                    "p_αβ for {:?},{:?} must lie in (0, {bound}), got {}",
                    ov.alpha, ov.beta, ov.value
                )));
            }
            p_ab[a * len + b] = ov.value;
            p_ab[b * len + a] = ov.value;
        }
        Ok(GrowthExponents {
            p,
            cut,
            p_gamma,
            q_gamma,
            upper,
            p_ab,
            len,
        })
    }
}

/// Exponents derived from a [`GrowthSpec`]; `None` in `p_gamma` stands for an unconstrained entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthExponents {
    pub p: f64,
    /// `m − n/p`.
    pub cut: f64,
    pub p_gamma: Vec<Option<f64>>,
    pub q_gamma: Vec<f64>,
    /// Whether `|γ| ≥ m − n/p`.
    pub upper: Vec<bool>,
    p_ab: Vec<f64>,
    len: usize,
}

impl GrowthExponents {
    pub fn p_ab(&self, a: usize, b: usize) -> f64 {
        self.p_ab[a * self.len + b]
    }

    /// `1 + Σ_k Σ_{|γ| ≥ m−n/p} |ξ^k_γ|^{p_γ}`.
    pub fn bracket(&self, jet: &Jet) -> f64 {
        let mut s = 1.0;
        for i in 0..jet.components() {
            for (g, pg) in self.p_gamma.iter().enumerate() {
                if let Some(pg) = pg {
                    s += jet.get(i, g).abs().powf(*pg);
                }
            }
        }
        s
    }
}

/// Ratios recorded for one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRatios {
    pub x: Vec<f64>,
    pub jet: Vec<f64>,
    /// `max |f_αβ| / RHS` of the second-derivative bound; violation when > 1.
    pub second_derivative: f64,
    /// `λ_min(top block) / RHS` of the ellipticity bound; violation when < 1.
    pub ellipticity: f64,
    /// Derived bounds on `|f|` and `|f_α|` (scalar case only); violation when > 1.
    pub value_bound: Option<f64>,
    pub first_derivative_bound: Option<f64>,
}

/// Outcome of a sampled growth scan. A pass is numerical evidence on the sample set only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub samples: usize,
    pub exponents: GrowthExponents,
    pub g1: Envelope,
    pub g2: Envelope,
    pub g1_fitted: bool,
    pub g2_fitted: bool,
    pub max_second_derivative_ratio: f64,
    pub min_ellipticity_ratio: f64,
    pub max_derived_ratio: Option<f64>,
    pub second_derivative_ok: bool,
    pub ellipticity_ok: bool,
    pub derived_ok: bool,
    pub witness: Option<SampleRatios>,
    pub note: String,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.second_derivative_ok && self.ellipticity_ok && self.derived_ok
    }
}

fn min_eigenvalue(block: &[f64], k: usize) -> f64 {
    let mat = nalgebra::DMatrix::from_row_slice(k, k, block);
    nalgebra::SymmetricEigen::new(mat)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

struct Raw {
    t: f64,
    h1: f64,
    r2: f64,
}

fn fit_upper(raw: &[Raw]) -> Envelope {
    let mut pts: Vec<(f64, f64)> = raw.iter().map(|r| (r.t, r.h1.max(1e-300))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut run = 0.0f64;
    let (breaks, values) = pts
        .into_iter()
        .map(|(t, v)| {
            run = run.max(v);
            (t, run)
        })
        .unzip();
    Envelope::Step { breaks, values }
}

fn fit_lower(raw: &[Raw]) -> Envelope {
    let mut pts: Vec<(f64, f64)> = raw.iter().map(|r| (r.t, r.r2)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut run = f64::INFINITY;
    let mut rev: Vec<(f64, f64)> = pts
        .into_iter()
        .rev()
        .map(|(t, v)| {
            run = run.min(v);
            (t, run)
        })
        .collect();
    rev.reverse();
    // A nonpositive suffix minimum cannot be an envelope; keep it so the check fails visibly.
    let floor = 1e-300;
    let (breaks, values) = rev.into_iter().map(|(t, v)| (t, v.max(floor))).unzip();
    Envelope::Step { breaks, values }
}

/// Scans the second-derivative bound, the ellipticity bound and the derived
/// value/first-derivative bounds at every sample.
pub fn check_growth(lag: &Lagrangian, samples: &[(Vec<f64>, Jet)]) -> Result<GrowthReport> {
    let exps = lag.growth().resolve(lag.indices())?;
    if samples.is_empty() {
        return Err(VeldtError::Configuration(
            "growth check needs at least one sample".into(),
        ));
    }
    let set = lag.indices();
    let per = set.len();
    let comps = lag.components();
    let dim = lag.jet_dim();
    let p = exps.p;
    let top: Vec<usize> = (0..comps)
        .flat_map(|i| {
            set.indices()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.order() == set.m())
                .map(move |(k, _)| i * per + k)
        })
        .collect();

    let mut raw = Vec::with_capacity(samples.len());
    let mut derivs = Vec::with_capacity(samples.len());
    for (x, jet) in samples {
        let d = lag.eval_jet_derivatives(x, jet)?;
        let t = jet.circ_norm(set, p);
        let s = exps.bracket(jet);
        let mut h1 = 0.0f64;
        for a in 0..dim {
            for b in 0..dim {
                let e = s.powf(exps.p_ab(a % per, b % per));
                h1 = h1.max(d.hess(a, b).abs() / e);
            }
        }
        let block: Vec<f64> = top
            .iter()
            .flat_map(|&a| top.iter().map(move |&b| (a, b)))
            .map(|(a, b)| d.hess(a, b))
            .collect();
        let lmin = min_eigenvalue(&block, top.len());
        let top_sum: f64 = top.iter().map(|&k| jet.values()[k].abs()).sum();
        let r2 = lmin / (1.0 + top_sum).powf(p - 2.0);
        raw.push(Raw { t, h1, r2 });
        derivs.push(d);
    }

    let (g1, g1_fitted) = match &lag.growth().g1 {
        Some(g) => (g.clone(), false),
        None => (fit_upper(&raw), true),
    };
    let (g2, g2_fitted) = match &lag.growth().g2 {
        Some(g) => (g.clone(), false),
        None => (fit_lower(&raw), true),
    };

    let big_m = per as f64;
    let mut max15 = 0.0f64;
    let mut min16 = f64::INFINITY;
    let mut max_derived: Option<f64> = None;
    let mut witness: Option<SampleRatios> = None;
    let mut worst_score = f64::NEG_INFINITY;
    for (((x, jet), r), d) in samples.iter().zip(&raw).zip(&derivs) {
        let g1t = g1.eval(r.t);
        let ratio15 = r.h1 / g1t;
        let ratio16 = r.r2 / g2.eval(r.t);
        let (value_bound, first_bound) = if comps == 1 {
            let zero = lag.zero_jet();
            let d0 = lag.eval_jet_derivatives(x, &zero)?;
            let t = r.t;
            let g3 = 1.0
                + g1t * (t * t * big_m + t * (big_m + 1.0).powi(2))
                + g1t * t * (big_m + 1.0)
                + g1t * (big_m + 1.0).powi(2);
            let g5 = (big_m + 1.0) * g1t * (t + 1.0);
            let s = exps.bracket(jet);
            let mut rhs = d0.value.abs() + g3 * s;
            for k in 0..per {
                if exps.upper[k] {
                    rhs += d0.gradient[k].abs().powf(exps.q_gamma[k]);
                } else {
                    rhs += t * d0.gradient[k].abs();
                }
            }
            let vb = d.value.abs() / rhs;
            let mut fb = 0.0f64;
            for k in 0..per {
                let bound = if exps.upper[k] {
                    d0.gradient[k].abs() + g5 + g5 * (s - 1.0).powf(1.0 / exps.q_gamma[k])
                } else {
                    d0.gradient[k].abs() + g5 * s
                };
                fb = fb.max(d.gradient[k].abs() / bound);
            }
            max_derived = Some(max_derived.unwrap_or(0.0).max(vb.max(fb)));
            (Some(vb), Some(fb))
        } else {
            (None, None)
        };
        max15 = max15.max(ratio15);
        min16 = min16.min(ratio16);
        let score = (ratio15 - 1.0)
            .max(1.0 - ratio16)
            .max(value_bound.unwrap_or(0.0) - 1.0)
            .max(first_bound.unwrap_or(0.0) - 1.0);
        if score > worst_score {
            worst_score = score;
            witness = Some(SampleRatios {
                x: x.clone(),
                jet: jet.values().to_vec(),
                second_derivative: ratio15,
                ellipticity: ratio16,
                value_bound,
                first_derivative_bound: first_bound,
            });
        }
    }
    let slack = 1e-12;
    let second_derivative_ok = max15 <= 1.0 + slack;
    let ellipticity_ok = min16 >= 1.0 - slack && g2.eval(0.0) > 1e-300;
    let derived_ok = max_derived.is_none_or(|v| v <= 1.0 + slack);
    let passed = second_derivative_ok && ellipticity_ok && derived_ok;
    Ok(GrowthReport {
        samples: samples.len(),
        exponents: exps,
        g1,
        g2,
        g1_fitted,
        g2_fitted,
        max_second_derivative_ratio: max15,
        min_ellipticity_ratio: min16,
        max_derived_ratio: max_derived,
        second_derivative_ok,
        ellipticity_ok,
        derived_ok,
        witness: if passed { None } else { witness },
        note: "sampled evidence on the given points, not a proof of the bounds".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{catalog, enumerate_multi_indices, PolynomialIntegrand};
    use std::sync::Arc;

    fn grid(lag: &Lagrangian, radius: f64, per_axis: usize) -> Vec<(Vec<f64>, Jet)> {
        lag.grid_jets(radius, per_axis)
            .into_iter()
            .map(|j| (vec![0.3], j))
            .collect()
    }

    #[test]
    fn exponents_for_first_order_problem_on_a_line() {
        let s = enumerate_multi_indices(1, 1);
        let e = GrowthSpec::quadratic().resolve(&s).unwrap();
        assert_eq!(e.p_gamma, vec![None, Some(2.0)]);
        assert_eq!(e.q_gamma, vec![1.0, 2.0]);
        assert_eq!(e.p_ab(1, 1), 0.0);
        assert_eq!(e.p_ab(1, 0), 0.5);
        assert_eq!(e.p_ab(0, 1), 0.5);
        assert_eq!(e.p_ab(0, 0), 1.0);
    }

    #[test]
    fn sobolev_exponents_follow_the_formula() {
        // n = 2, m = 2, p = 3: cut = 4/3, order 2 gets p_γ = 6/(2−0) = 3.
        let s = enumerate_multi_indices(2, 2);
        let spec = GrowthSpec {
            p: 3.0,
            ..GrowthSpec::quadratic()
        };
        let e = spec.resolve(&s).unwrap();
        for (k, a) in s.indices().iter().enumerate() {
            match a.order() {
                2 => assert_eq!(e.p_gamma[k], Some(3.0)),
                _ => assert_eq!(e.p_gamma[k], None),
            }
        }
        // n = 3, m = 2, p = 2: cut = 0.5; order 1 gets 6/(3−2) = 6, order 2 gets 2.
        let s = enumerate_multi_indices(3, 2);
        let e = GrowthSpec::quadratic().resolve(&s).unwrap();
        let first = s
            .position(&crate::lagrangian::MultiIndex::new(vec![1, 0, 0]))
            .unwrap();
        let second = s
            .position(&crate::lagrangian::MultiIndex::new(vec![1, 1, 0]))
            .unwrap();
        assert_eq!(e.p_gamma[first], Some(6.0));
        assert!((e.q_gamma[first] - 1.2).abs() < 1e-15);
        // Strict regime, default midpoint.
        let want = 0.5 * (1.0 - 1.0 / 6.0 - 1.0 / 6.0);
        assert!((e.p_ab(first, first) - want).abs() < 1e-15);
        assert!((e.p_ab(first, second) - 0.5 * (1.0 - 1.0 / 6.0 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn borderline_index_uses_declared_exponent() {
        // n = 2, m = 1, p = 2: cut = 0, so the zero index is borderline.
        let s = enumerate_multi_indices(2, 1);
        let e = GrowthSpec::quadratic().resolve(&s).unwrap();
        assert_eq!(e.p_gamma[0], Some(4.0));
        let spec = GrowthSpec {
            borderline_exponent: Some(3.0),
            ..GrowthSpec::quadratic()
        };
        assert_eq!(spec.resolve(&s).unwrap().p_gamma[0], Some(3.0));
        let bad = GrowthSpec {
            borderline_exponent: Some(1.0),
            ..GrowthSpec::quadratic()
        };
        assert!(matches!(bad.resolve(&s), Err(VeldtError::Configuration(_))));
    }

    #[test]
    fn misconfigured_interaction_is_rejected() {
        let s = enumerate_multi_indices(3, 2);
        let over = |alpha: Vec<usize>, beta: Vec<usize>, value| GrowthSpec {
            interaction: vec![InteractionOverride { alpha, beta, value }],
            ..GrowthSpec::quadratic()
        };
        assert!(over(vec![1, 0, 0], vec![0, 1, 0], 0.3).resolve(&s).is_ok());
        assert!(over(vec![1, 0, 0], vec![0, 1, 0], 0.9).resolve(&s).is_err());
        assert!(over(vec![1, 0, 0], vec![0, 1, 0], 0.0).resolve(&s).is_err());
        assert!(over(vec![2, 0, 0], vec![0, 2, 0], 0.1).resolve(&s).is_err());
        let low_p = GrowthSpec {
            p: 1.5,
            ..GrowthSpec::quadratic()
        };
        assert!(low_p.resolve(&s).is_err());
        let bad_env = GrowthSpec::quadratic().with_envelopes(
            Envelope::Constant { value: 0.0 },
            Envelope::Constant { value: 1.0 },
        );
        assert!(bad_env.resolve(&s).is_err());
    }

    #[test]
    fn stiffening_problem_passes_on_dense_grid() {
        let lag = catalog::p3(1).unwrap();
        let report = check_growth(&lag, &grid(&lag, 3.0, 31)).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(!report.g1_fitted && !report.g2_fitted);
        assert!(report.min_ellipticity_ratio >= 1.0);
        assert!(report.max_second_derivative_ratio <= 1.0);
    }

    #[test]
    fn dirichlet_energy_ellipticity_ratio_is_at_least_one() {
        let lag = catalog::dirichlet_only(1, 1)
            .unwrap()
            .with_growth(GrowthSpec::quadratic().with_envelopes(
                Envelope::Constant { value: 1.0 },
                Envelope::Constant { value: 1.0 },
            ))
            .unwrap();
        let samples: Vec<_> = lag
            .random_jets(5.0, 100, 3)
            .into_iter()
            .map(|j| (vec![1.0], j))
            .collect();
        let report = check_growth(&lag, &samples).unwrap();
        assert!(report.min_ellipticity_ratio >= 1.0);
        assert!(report.passed());
    }

    #[test]
    fn degenerate_quartic_fails_ellipticity_at_zero_slope() {
        let integrand = PolynomialIntegrand::from_terms(2, &[(0.5, vec![0, 4])]).unwrap();
        let lag = Lagrangian::new(
            "quartic slope",
            1,
            1,
            1,
            Arc::new(integrand),
            GrowthSpec::quadratic().with_envelopes(
                Envelope::Constant { value: 10.0 },
                Envelope::Constant { value: 1.0 },
            ),
        )
        .unwrap();
        let samples: Vec<_> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&s| (vec![0.5], Jet::from_values(1, 2, vec![0.0, s]).unwrap()))
            .collect();
        let report = check_growth(&lag, &samples).unwrap();
        assert!(!report.ellipticity_ok);
        let w = report.witness.unwrap();
        assert_eq!(w.jet, vec![0.0, 0.0]);
        assert_eq!(w.ellipticity, 0.0);
    }

    #[test]
    fn omitted_envelopes_are_fitted_monotone() {
        let lag = catalog::p2(1)
            .unwrap()
            .with_growth(GrowthSpec::quadratic())
            .unwrap();
        let samples: Vec<_> = lag
            .random_jets(4.0, 200, 11)
            .into_iter()
            .map(|j| (vec![1.0], j))
            .collect();
        let report = check_growth(&lag, &samples).unwrap();
        assert!(report.g1_fitted && report.g2_fitted);
        assert!(report.second_derivative_ok && report.ellipticity_ok);
        for w in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0].windows(2) {
            assert!(report.g1.eval(w[1]) >= report.g1.eval(w[0]));
            assert!(report.g2.eval(w[1]) >= report.g2.eval(w[0]));
        }
    }

    #[test]
    fn envelopes_evaluate() {
        assert_eq!(
            Envelope::Power {
                scale: 2.0,
                power: 2.0
            }
            .eval(1.0),
            8.0
        );
        assert_eq!(
            Envelope::Polynomial {
                coefs: vec![1.0, 0.0, 3.0]
            }
            .eval(2.0),
            13.0
        );
        let step = Envelope::Step {
            breaks: vec![1.0, 2.0],
            values: vec![1.0, 5.0],
        };
        assert_eq!(step.eval(0.0), 1.0);
        assert_eq!(step.eval(1.5), 1.0);
        assert_eq!(step.eval(2.0), 5.0);
        assert_eq!(step.eval(9.0), 5.0);
    }
}
