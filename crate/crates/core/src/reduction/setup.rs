use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::path::Path;

use super::ParamFunctional;
use crate::error::{Result, VeldtError};
use crate::spectral::{decompose, pencil_eigs};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SetupOptions {
    pub kernel_dim_hint: Option<usize>,
    /// Radius in `H⁰` (and step bound in the complement); defaults to 0.3× the pencil separation.
    pub trust_radius: Option<f64>,
    /// Half-width of the admissible `λ⃗` box; defaults to half the pencil separation.
    pub lambda_box: Option<f64>,
}

/// Kernel/complement splitting of `H` at a degenerate common critical point.
///
/// Sign convention: `𝓛_λ⃗ = 𝓕 − Σ λ_j 𝓖_j`.
#[derive(Debug, Clone)]
pub struct ReductionSetup {
    family: ParamFunctional,
    u0: DVector<f64>,
    lambda_star: Vec<f64>,
    kernel: DMatrix<f64>,
    complement: DMatrix<f64>,
    morse_index: usize,
    trust_radius: f64,
    lambda_box: f64,
}

/// One solve of the complement equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSolution {
    /// Complement coordinates of `ψ`.
    pub coords: DVector<f64>,
    /// `ψ` as a coefficient vector.
    pub w: DVector<f64>,
    /// `‖P^⊥∇𝓛_λ⃗(u₀ + z + ψ)‖_{m,2}`.
    pub residual: f64,
    pub iterations: usize,
}

/// `𝓛°_λ⃗(z)` with its gradient in kernel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedSample {
    pub lambda: Vec<f64>,
    pub z: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub residual: f64,
    pub psi_norm: f64,
    #[serde(skip)]
    pub psi: DVector<f64>,
}

pub const PSI_TOL: f64 = 1e-11;
const MAX_ITER: usize = 50;

impl ReductionSetup {
    pub fn new(
        family: ParamFunctional,
        u0: DVector<f64>,
        lambda_star: &[f64],
        opts: SetupOptions,
    ) -> Result<Self> {
        let disc = family.disc();
        if u0.len() != disc.dim() {
            return Err(VeldtError::Configuration(format!(
                "base point has {} coefficients, the space has {}",
                u0.len(),
                disc.dim()
            )));
        }
        let (df, dg) = family.criticality(&u0)?;
        let tol = 1e-9 * (1.0 + disc.norm(&u0));
        if df > tol || dg.iter().any(|d| *d > tol) {
            return Err(VeldtError::HypothesisViolation(format!(
                "base point is not a common critical point: ‖𝓕′‖ = {df:.3e}, ‖𝓖′‖ = {dg:?}"
            )));
        }
        let b = family.hessian(lambda_star, &u0)?;
        let dec = decompose(&b, disc.gram(), opts.kernel_dim_hint)?;
        if dec.nullity == 0 {
            return Err(VeldtError::Configuration(format!(
                "the Hessian at λ = {lambda_star:?} has trivial kernel; there is nothing to reduce"
            )));
        }
        let separation = if family.n_params() == 1 {
            let pencil = pencil_eigs(
                &family.f_hessian(&u0)?,
                &family.g_hessians(&u0)?[0],
                disc.gram(),
            )?;
            let sep = pencil.separation(lambda_star[0]);
            if sep.is_finite() {
                Some(sep)
            } else {
                Some(lambda_star[0].abs().max(1.0))
            }
        } else {
            None
        };
        let pick = |given: Option<f64>, factor: f64, what: &str| -> Result<f64> {
            match (given, separation) {
                (Some(v), _) if v > 0.0 => Ok(v),
                (Some(v), _) => Err(VeldtError::Configuration(format!(
                    "{what} must be positive, got {v}"
                ))),
                (None, Some(s)) => Ok(factor * s),
                (None, None) => Err(VeldtError::Configuration(format!(
                    "{what} must be given explicitly for several parameters"
                ))),
            }
        };
        let trust_radius = pick(opts.trust_radius, 0.3, "trust radius")?;
        let lambda_box = pick(opts.lambda_box, 0.5, "parameter box")?;
        let neg = dec.negative_basis();
        let pos = dec.positive_basis();
        let mut complement = DMatrix::zeros(disc.dim(), neg.ncols() + pos.ncols());
        complement.columns_mut(0, neg.ncols()).copy_from(&neg);
        complement
            .columns_mut(neg.ncols(), pos.ncols())
            .copy_from(&pos);
        Ok(Self {
            kernel: dec.kernel_basis(),
            complement,
            morse_index: dec.morse_index,
            family,
            u0,
            lambda_star: lambda_star.to_vec(),
            trust_radius,
            lambda_box,
        })
    }

    pub fn family(&self) -> &ParamFunctional {
        &self.family
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.u0
    }

    pub fn lambda_star(&self) -> &[f64] {
        &self.lambda_star
    }

    /// Gram-orthonormal basis of `H⁰`, one column per vector.
    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn complement(&self) -> &DMatrix<f64> {
        &self.complement
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    /// `m⁻`, the Morse index at `λ⃗*`.
    pub fn morse_index(&self) -> usize {
        self.morse_index
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    pub fn lambda_box(&self) -> f64 {
        self.lambda_box
    }

    /// `P⁰ = E Eᵀ G`.
    pub fn kernel_projector(&self) -> DMatrix<f64> {
        &self.kernel * self.kernel.transpose() * self.family.disc().gram()
    }

    /// `P^⊥ = I − P⁰`.
    pub fn complement_projector(&self) -> DMatrix<f64> {
        let n = self.u0.len();
        DMatrix::identity(n, n) - self.kernel_projector()
    }

    /// `u₀ + Ez`.
    pub fn kernel_field(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.u0 + &self.kernel * z
    }

    fn check_point(&self, lambda: &[f64], z: &DVector<f64>) -> Result<()> {
        if z.len() != self.kernel_dim() {
            return Err(VeldtError::Configuration(format!(
                "kernel coordinates have length {}, expected {}",
                z.len(),
                self.kernel_dim()
            )));
        }
        if z.norm() > self.trust_radius * (1.0 + 1e-12) {
            return Err(VeldtError::Configuration(format!(
                "‖z‖ = {} exceeds the trust radius {}",
                z.norm(),
                self.trust_radius
            )));
        }
        if lambda.len() != self.lambda_star.len()
            || lambda
                .iter()
                .zip(&self.lambda_star)
                .any(|(l, s)| (l - s).abs() > self.lambda_box * (1.0 + 1e-12))
        {
            return Err(VeldtError::Configuration(format!(
                "λ = {lambda:?} is outside the box of half-width {} around {:?}",
                self.lambda_box, self.lambda_star
            )));
        }
        Ok(())
    }

    /// Solves `P^⊥∇𝓛_λ⃗(u₀ + z + w) = 0` for `w ⊥ H⁰` by Newton's method.
    pub fn solve_psi(
        &self,
        lambda: &[f64],
        z: &DVector<f64>,
        tol: f64,
        warm: Option<&DVector<f64>>,
    ) -> Result<PsiSolution> {
        self.check_point(lambda, z)?;
        self.solve_psi_from(lambda, z, tol, warm.cloned())
    }

    pub(crate) fn solve_psi_from(
        &self,
        lambda: &[f64],
        z: &DVector<f64>,
        tol: f64,
        start: Option<DVector<f64>>,
    ) -> Result<PsiSolution> {
        let disc = self.family.disc();
        let c = &self.complement;
        let base = self.kernel_field(z);
        let target = tol * (1.0 + disc.dual_norm(&self.family.gradient(lambda, &base)?));
        let mut y = start.unwrap_or_else(|| DVector::zeros(c.ncols()));
        let field = |y: &DVector<f64>| &base + c * y;
        let mut r = c.transpose() * self.family.gradient(lambda, &field(&y))?;
        let mut res = r.norm();
        for it in 0..MAX_ITER {
            if res < target {
                return Ok(PsiSolution {
                    w: c * &y,
                    coords: y,
                    residual: res,
                    iterations: it,
                });
            }
            let h = self.family.hessian(lambda, &field(&y))?;
            let j = c.transpose() * h * c;
            let mut step = j.lu().solve(&(-&r)).filter(|s| s.iter().all(|v| v.is_finite())).ok_or_else(|| {
                VeldtError::Degeneracy(
                    "complement block of the Hessian is singular; the kernel basis is wrong or the nullity changed"
                        .into(),
                )
            })?;
            let len = step.norm();
            if len > self.trust_radius {
                step *= self.trust_radius / len;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let trial = &y + &step * alpha;
                let rt = c.transpose() * self.family.gradient(lambda, &field(&trial))?;
                if rt.norm() < res {
                    y = trial;
                    r = rt;
                    res = r.norm();
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(VeldtError::ReductionFailure {
                    iterations: it,
                    residual: res,
                });
            }
        }
        if res < target {
            return Ok(PsiSolution {
                w: c * &y,
                coords: y,
                residual: res,
                iterations: MAX_ITER,
            });
        }
        Err(VeldtError::ReductionFailure {
            iterations: MAX_ITER,
            residual: res,
        })
    }

    /// Solves for `ψ` and evaluates `𝓛°_λ⃗(z)` and `Eᵀ𝓛′_λ⃗(u₀ + z + ψ)`.
    pub fn reduce(
        &self,
        lambda: &[f64],
        z: &DVector<f64>,
        warm: Option<&DVector<f64>>,
    ) -> Result<ReducedSample> {
        let psi = self.solve_psi(lambda, z, PSI_TOL, warm)?;
        let u = self.kernel_field(z) + &psi.w;
        let value = self.family.value(lambda, &u)?;
        let gradient = self.kernel.transpose() * self.family.gradient(lambda, &u)?;
        Ok(ReducedSample {
            lambda: lambda.to_vec(),
            z: z.iter().copied().collect(),
            value,
            gradient: gradient.iter().copied().collect(),
            residual: psi.residual,
            psi_norm: psi.coords.norm(),
            psi: psi.coords,
        })
    }

    pub fn reduced_value(&self, lambda: &[f64], z: &DVector<f64>) -> Result<f64> {
        Ok(self.reduce(lambda, z, None)?.value)
    }

    pub fn reduced_gradient(&self, lambda: &[f64], z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.reduce(lambda, z, None)?.gradient))
    }

    /// `d²𝓛°_λ⃗(z) = EᵀHE − EᵀHC(CᵀHC)⁻¹CᵀHE` at the lifted point of `sample`.
    pub fn reduced_hessian(&self, sample: &ReducedSample) -> Result<DMatrix<f64>> {
        let h = self.family.hessian(&sample.lambda, &self.lift(sample))?;
        let (e, c) = (&self.kernel, &self.complement);
        let he = &h * e;
        let chc = c.transpose() * &h * c;
        let che = c.transpose() * &he;
        let corr = chc.lu().solve(&che).ok_or_else(|| {
            VeldtError::Degeneracy("complement block of the Hessian is singular".into())
        })?;
        let r = e.transpose() * he - che.transpose() * corr;
        Ok((&r + r.transpose()) * 0.5)
    }

    /// Lifts a reduced point to the full field `u₀ + z + ψ`.
    pub fn lift(&self, sample: &ReducedSample) -> DVector<f64> {
        self.kernel_field(&DVector::from_column_slice(&sample.z)) + &self.complement * &sample.psi
    }

    /// Evaluates the reduced functional on `zs`, solving outward from `0` with warm starts.
    pub fn continuation(&self, lambda: &[f64], zs: &[DVector<f64>]) -> Result<Vec<ReducedSample>> {
        let mut order: Vec<usize> = (0..zs.len()).collect();
        order.sort_by(|&a, &b| zs[a].norm().total_cmp(&zs[b].norm()).then(a.cmp(&b)));
        let mut done: Vec<Option<ReducedSample>> = vec![None; zs.len()];
        let mut solved: Vec<usize> = Vec::new();
        for i in order {
            let warm = solved
                .iter()
                .min_by(|&&a, &&b| {
                    (&zs[a] - &zs[i])
                        .norm()
                        .total_cmp(&(&zs[b] - &zs[i]).norm())
                })
                .and_then(|&j| done[j].as_ref().map(|s| s.psi.clone()));
            done[i] = Some(self.reduce(lambda, &zs[i], warm.as_ref())?);
            solved.push(i);
        }
        Ok(done
            .into_iter()
            .map(|s| s.expect("every point solved"))
            .collect())
    }
}

/// Writes reduced samples as CSV: `lambda_*`, `z_*`, `value`, `gradient_norm`, `residual`.
pub fn write_reduced_csv(path: &Path, samples: &[ReducedSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let (nl, nz) = samples
        .first()
        .map_or((0, 0), |s| (s.lambda.len(), s.z.len()));
    let mut header: Vec<String> = (1..=nl).map(|j| format!("lambda_{j}")).collect();
    header.extend((1..=nz).map(|j| format!("z_{j}")));
    header.extend(["value", "gradient_norm", "residual"].map(String::from));
    w.write_record(&header)?;
    for s in samples {
        let gn = s.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        let row: Vec<String> = s
            .lambda
            .iter()
            .chain(&s.z)
            .chain([s.value, gn, s.residual].iter())
            .map(|v| format!("{v:.17e}"))
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
