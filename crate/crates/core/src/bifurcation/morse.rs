use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, VeldtError};
use crate::reduction::{find_critical_point, Functional, NewtonOptions, ParamFunctional};
use crate::spectral::decompose;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub value: f64,
    /// `‖u‖_{m,2}`.
    pub norm: f64,
    pub residual: f64,
    pub morse_index: usize,
    pub nullity: usize,
    #[serde(skip)]
    pub u: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusOptions {
    /// Random starts in addition to the structured ones.
    pub starts: usize,
    /// Largest start norm.
    pub radius: f64,
    /// Structured starts `±s e_k` use the first `modes` basis functions of each component.
    pub modes: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            starts: 24,
            radius: 4.0,
            modes: 4,
            seed: 0,
            tol: 1e-10,
        }
    }
}

/// Multistart Newton search for critical points; each is classified by its Hessian.
pub fn critical_point_census(
    f: &dyn Functional,
    opts: CensusOptions,
) -> Result<Vec<CriticalPoint>> {
    let disc = f.disc();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let nb = disc.basis_count();
    let mut starts = vec![disc.zero()];
    for i in 0..disc.components() {
        for k in 0..opts.modes.min(nb) {
            let e = disc.mode(i, k, 1.0);
            let unit = &e / disc.norm(&e);
            for frac in [0.25, 0.5, 1.0] {
                for sign in [1.0, -1.0] {
                    starts.push(&unit * (sign * frac * opts.radius));
                }
            }
        }
    }
    for _ in 0..opts.starts {
        let r = opts.radius * rng.gen_range(0.05..1.0);
        starts.push(disc.random_field(&mut rng, r));
    }
    let newton = NewtonOptions {
        tol: opts.tol,
        max_iter: 100,
        max_step: 0.25 * opts.radius,
    };
    let mut found: Vec<CriticalPoint> = Vec::new();
    for s in starts {
        let Ok(out) = find_critical_point(f, &s, newton) else {
            continue;
        };
        if found
            .iter()
            .any(|c| disc.norm(&(&c.u - &out.u)) < 1e-6 * (1.0 + c.norm))
        {
            continue;
        }
        let dec = decompose(&f.hessian(&out.u)?, disc.gram(), None)?;
        found.push(CriticalPoint {
            value: f.value(&out.u)?,
            norm: disc.norm(&out.u),
            residual: out.residual,
            morse_index: dec.morse_index,
            nullity: dec.nullity,
            u: out.u,
        });
    }
    found.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.norm.total_cmp(&b.norm)));
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub l: usize,
    /// `Σ_{j≤l} (−1)^{l−j} N_j`.
    pub lhs: i64,
    /// `Σ_{j≤l} (−1)^{l−j} β_j` with `β_j = δ_{j0}`.
    pub rhs: i64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseAudit {
    pub lambda: f64,
    pub levels: Option<(f64, f64)>,
    pub points: Vec<CriticalPoint>,
    /// `N_q`: critical points of Morse index `q`.
    pub counts: Vec<usize>,
    /// `Σ (−1)^q N_q`.
    pub euler: i64,
    pub euler_holds: bool,
    pub partial_sums: Vec<PartialSum>,
    pub coercive: bool,
    pub passed: bool,
    pub note: String,
}

fn ray_coercive(f: &dyn Functional, radius: f64, seed: u64) -> Result<bool> {
    let disc = f.disc();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..8 {
        let v = disc.random_field(&mut rng, 1.0);
        let mut prev = f64::NEG_INFINITY;
        for s in [1.0, 2.0, 4.0, 8.0] {
            let val = f.value(&(&v * (s * radius)))?;
            if val <= prev {
                return Ok(false);
            }
            prev = val;
        }
        if prev <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts critical points of `𝓛_λ` by Morse index and checks the Morse relations
/// for a coercive functional on a contractible space.
pub fn morse_inequality_audit(
    family: &ParamFunctional,
    lambda: f64,
    levels: Option<(f64, f64)>,
    opts: CensusOptions,
) -> Result<MorseAudit> {
    let f = family.at(&[lambda])?;
    let mut points = critical_point_census(&f, opts)?;
    if let Some((a, b)) = levels {
        points.retain(|p| p.value >= a && p.value <= b);
    }
    if let Some(p) = points.iter().find(|p| p.nullity > 0) {
        return Err(VeldtError::AuditAborted {
            nullity: p.nullity,
            norm: p.norm,
        });
    }
    let top = points.iter().map(|p| p.morse_index).max().unwrap_or(0);
    let mut counts = vec![0usize; top + 1];
    for p in &points {
        counts[p.morse_index] += 1;
    }
    let euler: i64 = counts
        .iter()
        .enumerate()
        .map(|(q, n)| if q % 2 == 0 { *n as i64 } else { -(*n as i64) })
        .sum();
    let partial_sums: Vec<PartialSum> = (0..counts.len())
        .map(|l| {
            let lhs: i64 = (0..=l)
                .map(|j| {
                    if (l - j) % 2 == 0 {
                        counts[j] as i64
                    } else {
                        -(counts[j] as i64)
                    }
                })
                .sum();
            let rhs = if l % 2 == 0 { 1 } else { -1 };
            PartialSum {
                l,
                lhs,
                rhs,
                holds: lhs >= rhs,
            }
        })
        .collect();
    let coercive = ray_coercive(&f, opts.radius, opts.seed)?;
    let euler_holds = euler == 1;
    Ok(MorseAudit {
        lambda,
        levels,
        passed: coercive && euler_holds && partial_sums.iter().all(|p| p.holds),
        points,
        counts,
        euler,
        euler_holds,
        partial_sums,
        coercive,
        note: "census by multistart Newton; Betti numbers taken as those of a point".into(),
    })
}
