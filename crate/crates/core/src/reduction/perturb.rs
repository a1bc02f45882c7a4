use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::newton::{find_critical_point, NewtonOptions};
use super::{Functional, ReductionSetup};
use crate::error::{Result, VeldtError};
use crate::galerkin::Discretization;
use crate::spectral::decompose;

/// `1 − S((t − a)/(b − a))` with the quintic smoothstep `S`, and its first two derivatives.
fn cutoff(t: f64, a: f64, b: f64) -> (f64, f64, f64) {
    if t <= a {
        return (1.0, 0.0, 0.0);
    }
    if t >= b {
        return (0.0, 0.0, 0.0);
    }
    let w = b - a;
    let x = (t - a) / w;
    let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    let d2s = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (1.0 - s, -ds / w, -d2s / (w * w))
}

/// `𝓛̃_b(u) = 𝓛(u) + β(u) ρ(‖P⁰(u − u₀)‖)(b, P⁰(u − u₀))`.
///
/// `β` equals 1 on `B(u₀, δ)` and vanishes outside `B(u₀, r)`; `ρ` equals 1 below `δ/2`
/// and vanishes above `δ`.
pub struct Perturbed<'a> {
    base: &'a dyn Functional,
    u0: DVector<f64>,
    kernel: DMatrix<f64>,
    b: DVector<f64>,
    r: f64,
    delta: f64,
}

/// Wraps `base` with the Marino–Prodi perturbation; `b` is given in kernel coordinates.
pub fn marino_prodi_perturb<'a>(
    base: &'a dyn Functional,
    u0: &DVector<f64>,
    kernel: &DMatrix<f64>,
    r: f64,
    delta: f64,
    b: &DVector<f64>,
) -> Result<Perturbed<'a>> {
    if !(delta > 0.0 && delta < r) {
        return Err(VeldtError::Configuration(format!(
            "radii must satisfy 0 < δ < r, got δ = {delta}, r = {r}"
        )));
    }
    if b.len() != kernel.ncols() || u0.len() != base.dim() {
        return Err(VeldtError::Configuration(
            "perturbation vector does not match the kernel".into(),
        ));
    }
    Ok(Perturbed {
        base,
        u0: u0.clone(),
        kernel: kernel.clone(),
        b: b.clone(),
        r,
        delta,
    })
}

struct Terms {
    t: f64,
    s: f64,
    /// `G d`, with `d = u − u₀`.
    gd: DVector<f64>,
    /// Kernel coordinates `c = EᵀGd`.
    c: DVector<f64>,
    beta: (f64, f64, f64),
    rho: (f64, f64, f64),
    lin: f64,
}

impl Perturbed<'_> {
    fn terms(&self, u: &DVector<f64>) -> Option<Terms> {
        let gram = self.base.disc().gram();
        let d = u - &self.u0;
        let gd = gram * &d;
        let t = d.dot(&gd).max(0.0).sqrt();
        if t >= self.r || self.b.iter().all(|v| *v == 0.0) {
            return None;
        }
        let c = self.kernel.transpose() * &gd;
        let s = c.norm();
        Some(Terms {
            beta: cutoff(t, self.delta, self.r),
            rho: cutoff(s, 0.5 * self.delta, self.delta),
            lin: self.b.dot(&c),
            t,
            s,
            gd,
            c,
        })
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r, self.delta)
    }
}

impl Functional for Perturbed<'_> {
    fn disc(&self) -> &Discretization {
        self.base.disc()
    }

    fn value(&self, u: &DVector<f64>) -> Result<f64> {
        let v = self.base.value(u)?;
        Ok(match self.terms(u) {
            None => v,
            Some(k) => v + k.beta.0 * k.rho.0 * k.lin,
        })
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let mut g = self.base.gradient(u)?;
        if let Some(k) = self.terms(u) {
            let gram = self.disc().gram();
            let ge = gram * &self.kernel;
            let (b0, b1, _) = k.beta;
            let (r0, r1, _) = k.rho;
            if b1 != 0.0 {
                g.axpy(b1 * r0 * k.lin / k.t, &k.gd, 1.0);
            }
            if r1 != 0.0 {
                g.axpy(b0 * r1 * k.lin / k.s, &(&ge * &k.c), 1.0);
            }
            g.axpy(b0 * r0, &(&ge * &self.b), 1.0);
        }
        Ok(g)
    }

    fn hessian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut h = self.base.hessian(u)?;
        if let Some(k) = self.terms(u) {
            let gram = self.disc().gram();
            let ge = gram * &self.kernel;
            let (b0, b1, b2) = k.beta;
            let (r0, r1, r2) = k.rho;
            let lin = k.lin;
            // ∇t, ∇s, ∇L in dual coordinates.
            let dt = if b1 != 0.0 || b2 != 0.0 {
                &k.gd / k.t
            } else {
                DVector::zeros(u.len())
            };
            let ds = if r1 != 0.0 || r2 != 0.0 {
                &ge * &k.c / k.s
            } else {
                DVector::zeros(u.len())
            };
            let dl = &ge * &self.b;
            let sym = |a: &DVector<f64>, b: &DVector<f64>| a * b.transpose() + b * a.transpose();
            if b2 != 0.0 {
                h += &dt * dt.transpose() * (b2 * r0 * lin);
            }
            if b1 != 0.0 {
                let d2t = (gram - &dt * dt.transpose()) / k.t;
                h += d2t * (b1 * r0 * lin);
                h += sym(&dt, &dl) * (b1 * r0);
                if r1 != 0.0 {
                    h += sym(&dt, &ds) * (b1 * r1 * lin);
                }
            }
            if r2 != 0.0 {
                h += &ds * ds.transpose() * (b0 * r2 * lin);
            }
            if r1 != 0.0 {
                let d2s = (&ge * ge.transpose() - &ds * ds.transpose()) / k.s;
                h += d2s * (b0 * r1 * lin);
                h += sym(&ds, &dl) * (b0 * r1);
            }
        }
        Ok(h)
    }
}

/// One perturbed critical point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedPoint {
    pub distance: f64,
    pub residual: f64,
    pub morse_index: usize,
    pub nullity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationTrial {
    pub b: Vec<f64>,
    pub b_norm: f64,
    /// `ν/5` with `ν` the smallest reduced gradient norm sampled on the annulus `δ/2 ≤ ‖z‖ ≤ δ`.
    pub b_bound: f64,
    pub retries: usize,
    pub points: Vec<PerturbedPoint>,
    pub within_bracket: bool,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarinoProdiReport {
    pub r: f64,
    pub delta: f64,
    /// `[m⁻, m⁻ + n⁰]`.
    pub bracket: (usize, usize),
    pub trials: Vec<PerturbationTrial>,
    /// `max |𝓛̃_b − 𝓛|` over sampled fields with `‖u − u₀‖ ≥ r`.
    pub exterior_max_difference: f64,
    pub passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbOptions {
    pub r: f64,
    pub delta: f64,
    /// Target `‖b‖` as a fraction of the `ν/5` bound.
    pub b_fraction: f64,
    pub trials: usize,
    pub max_retries: usize,
    pub starts: usize,
    pub seed: u64,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        Self {
            r: 0.6,
            delta: 0.3,
            b_fraction: 0.5,
            trials: 5,
            max_retries: 5,
            starts: 16,
            seed: 0,
        }
    }
}

/// Smallest reduced gradient norm on the annulus `δ/2 ≤ ‖z‖ ≤ δ`.
pub fn annulus_gradient_floor(
    setup: &ReductionSetup,
    lambda: &[f64],
    delta: f64,
    seed: u64,
) -> Result<f64> {
    let nu = setup.kernel_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<DVector<f64>> = if nu == 1 {
        vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -1.0),
        ]
    } else {
        (0..8 * nu)
            .map(|_| DVector::from_fn(nu, |_, _| rng.gen_range(-1.0..1.0)).normalize())
            .collect()
    };
    let mut floor = f64::INFINITY;
    for dir in &dirs {
        for k in 0..=4 {
            let s = 0.5 * delta * (1.0 + k as f64 / 4.0);
            floor = floor.min(setup.reduced_gradient(lambda, &(dir * s))?.norm());
        }
    }
    Ok(floor)
}

fn census(
    f: &dyn Functional,
    u0: &DVector<f64>,
    kernel: &DMatrix<f64>,
    opts: &PerturbOptions,
    rng: &mut ChaCha8Rng,
) -> Vec<(DVector<f64>, f64)> {
    let disc = f.disc();
    let nu = kernel.ncols();
    let mut starts: Vec<DVector<f64>> = Vec::new();
    for k in 0..opts.starts {
        let zc = DVector::from_fn(nu, |_, _| rng.gen_range(-1.0..1.0));
        let frac = (k as f64 + 0.5) / opts.starts as f64;
        let z = zc.normalize() * (opts.delta * frac);
        let noise = disc.random_field(rng, 0.05 * opts.delta);
        starts.push(u0 + kernel * z + noise);
    }
    let newton = NewtonOptions {
        tol: 1e-12,
        max_iter: 80,
        max_step: 0.25 * opts.delta,
    };
    let mut found: Vec<(DVector<f64>, f64)> = Vec::new();
    for s in starts {
        if let Ok(out) = find_critical_point(f, &s, newton) {
            if disc.norm(&(&out.u - u0)) >= opts.r {
                continue;
            }
            if found.iter().all(|(v, _)| disc.norm(&(v - &out.u)) > 1e-6) {
                found.push((out.u, out.residual));
            }
        }
    }
    found
}

/// Perturbs the degenerate critical point `u₀` of `𝓛_λ⃗` with small random `b` and
/// checks that the perturbed critical points near `u₀` are nondegenerate with Morse
/// indices in `[m⁻, m⁻ + n⁰]`.
pub fn marino_prodi_audit(
    setup: &ReductionSetup,
    lambda: &[f64],
    opts: PerturbOptions,
) -> Result<MarinoProdiReport> {
    if opts.delta > setup.trust_radius() {
        return Err(VeldtError::Configuration(format!(
            "δ = {} exceeds the trust radius {}",
            opts.delta,
            setup.trust_radius()
        )));
    }
    let fam = setup.family();
    let base = fam.at(lambda)?;
    let disc = fam.disc();
    let u0 = setup.base_point();
    let kernel = setup.kernel();
    let nu = setup.kernel_dim();
    let floor = annulus_gradient_floor(setup, lambda, opts.delta, opts.seed)?;
    let b_bound = floor / 5.0;
    let bracket = (setup.morse_index(), setup.morse_index() + nu);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trials = Vec::new();
    let mut exterior = 0.0f64;
    for _ in 0..opts.trials {
        let mut retries = 0;
        let trial = loop {
            let b = DVector::from_fn(nu, |_, _| rng.gen_range(-1.0..1.0)).normalize()
                * (opts.b_fraction * b_bound * rng.gen_range(0.5..1.0));
            let pert = marino_prodi_perturb(&base, u0, kernel, opts.r, opts.delta, &b)?;
            let found = census(&pert, u0, kernel, &opts, &mut rng);
            let mut points = Vec::new();
            for (u, residual) in &found {
                let dec = decompose(&pert.hessian(u)?, disc.gram(), None)?;
                points.push(PerturbedPoint {
                    distance: disc.norm(&(u - u0)),
                    residual: *residual,
                    morse_index: dec.morse_index,
                    nullity: dec.nullity,
                });
            }
            for _ in 0..8 {
                let t = opts.r * (1.0 + 2.0 * rng.gen_range(0.0..1.0));
                let v = u0 + disc.random_field(&mut rng, t);
                exterior = exterior.max((pert.value(&v)? - base.value(&v)?).abs());
            }
            let nondegenerate = points.iter().all(|p| p.nullity == 0);
            if nondegenerate || retries >= opts.max_retries {
                break PerturbationTrial {
                    b_norm: b.norm(),
                    b: b.iter().copied().collect(),
                    b_bound,
                    retries,
                    within_bracket: points
                        .iter()
                        .all(|p| p.morse_index >= bracket.0 && p.morse_index <= bracket.1),
                    nondegenerate,
                    points,
                };
            }
            retries += 1;
        };
        trials.push(trial);
    }
    let passed = exterior == 0.0
        && trials
            .iter()
            .all(|t| t.nondegenerate && t.within_bracket && !t.points.is_empty());
    Ok(MarinoProdiReport {
        r: opts.r,
        delta: opts.delta,
        bracket,
        trials,
        exterior_max_difference: exterior,
        passed,
        note:
            "critical points located by multistart Newton inside B(u0, r); census may miss points"
                .into(),
    })
}
