use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Loaded, Settings};
use super::report::AuditLine;
use crate::bifurcation::{
    detect_branches, index_jump_report, jump_epsilon, morse_inequality_audit, write_branch_csv,
    Alternative, BranchOptions, CensusOptions, ConditionClass, PencilSummary,
};
use crate::error::{Result, VeldtError};
use crate::galerkin::{
    assemble_dual_gradient, assemble_functional, assemble_hessian, garding_constants,
    q_decay_profile, Discretization,
};
use crate::lagrangian::{check_growth, Lagrangian};
use crate::reduction::{
    lipschitz_audit, reduced_hessian_at_origin, uniqueness_probe, write_reduced_csv,
    ParamFunctional, ReductionSetup, SetupOptions, PSI_TOL,
};
use crate::spectral::{
    decompose, morse_index_by_formula, pencil_eigs, Definiteness, MorseMode, PencilSpectrum,
};

pub struct Outputs {
    pub result: Value,
    pub audits: Vec<AuditLine>,
    pub files: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn pencil_at_zero(fam: &ParamFunctional) -> Result<(DMatrix<f64>, DMatrix<f64>, PencilSpectrum)> {
    let u0 = fam.disc().zero();
    let f = fam.f_hessian(&u0)?;
    let g = fam.g_hessians(&u0)?.remove(0);
    let p = pencil_eigs(&f, &g, fam.disc().gram())?;
    Ok((f, g, p))
}

fn write_spectrum_csv(path: &Path, p: &PencilSpectrum) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "lambda", "multiplicity", "neg", "zero", "pos"])?;
    for (i, g) in p.groups.iter().enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:.12e}", g.lambda),
            g.multiplicity.to_string(),
            g.inertia.0.to_string(),
            g.inertia.1.to_string(),
            g.inertia.2.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Central difference with one Richardson step.
fn richardson(h: f64, d: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn richardson_vec(h: f64, d: impl Fn(f64) -> Result<DVector<f64>>) -> Result<DVector<f64>> {
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

pub fn validate(
    loaded: &Loaded,
    lag: &Lagrangian,
    disc: &Discretization,
    seed: u64,
) -> Result<Outputs> {
    let s = &loaded.config.settings;
    let radius = s.radius.unwrap_or(3.0);
    let center: Vec<f64> = disc
        .spec()
        .domain
        .lower
        .iter()
        .zip(&disc.spec().domain.upper)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let samples: Vec<_> = lag
        .random_jets(radius, s.samples.unwrap_or(500), seed)
        .into_iter()
        .map(|j| (center.clone(), j))
        .collect();
    let growth = check_growth(lag, &samples)?;
    let mut audits = vec![AuditLine::new(
        "growth-bounds",
        growth.passed(),
        format!(
            "second-derivative ratio {:.4e}, ellipticity ratio {:.4e}",
            growth.max_second_derivative_ratio, growth.min_ellipticity_ratio
        ),
    )];

    let tol = s.tolerance.unwrap_or(1e-6);
    let hilbert = lag.growth().p == 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad_err = 0.0f64;
    let mut hess_err = 0.0f64;
    let mut split_defect = 0.0f64;
    let mut symmetric = true;
    let mut min_c0 = f64::INFINITY;
    let h = 1e-4;
    let fields = s.fields.unwrap_or(20);
    for _ in 0..fields {
        let u = disc.random_field(&mut rng, 1.0);
        let v = disc.random_field(&mut rng, 1.0);
        let v = &v / disc.norm(&v);
        let ell = assemble_dual_gradient(lag, disc, &u)?;
        let exact = ell.dot(&v);
        let fd = richardson(h, |t| {
            Ok((assemble_functional(lag, disc, &(&u + &v * t))?
                - assemble_functional(lag, disc, &(&u - &v * t))?)
                / (2.0 * t))
        })?;
        let scale = exact
            .abs()
            .max(1e-2 * disc.dual_norm(&ell))
            .max(f64::MIN_POSITIVE);
        grad_err = grad_err.max((fd - exact).abs() / scale);
        if hilbert {
            let split = assemble_hessian(lag, disc, &u)?;
            let bv = &split.b * &v;
            let fd = richardson_vec(h, |t| {
                Ok((assemble_dual_gradient(lag, disc, &(&u + &v * t))?
                    - assemble_dual_gradient(lag, disc, &(&u - &v * t))?)
                    / (2.0 * t))
            })?;
            hess_err = hess_err.max((fd - &bv).norm() / bv.norm().max(f64::MIN_POSITIVE));
            let check = split.check();
            split_defect = split_defect.max(check.relative_defect);
            symmetric &= check.symmetric;
            min_c0 = min_c0.min(split.c0_estimate);
        }
    }
    audits.push(AuditLine::new(
        "gradient-oracle",
        grad_err < tol,
        format!("max relative error {grad_err:.3e} over {fields} fields"),
    ));
    let mut result = json!({
        "growth": to_value(&growth),
        "derivatives": {"fields": fields, "max_gradient_error": grad_err},
    });
    if hilbert {
        audits.push(AuditLine::new(
            "hessian-oracle",
            hess_err < tol,
            format!("max relative error {hess_err:.3e} over {fields} fields"),
        ));
        audits.push(AuditLine::new(
            "split-identity",
            split_defect < 1e-12 && symmetric,
            format!("max relative defect {split_defect:.3e}"),
        ));
        audits.push(AuditLine::new(
            "principal-positivity",
            min_c0 > 0.0,
            format!("min C0 {min_c0:.4e}"),
        ));
        let zero = disc.zero();
        let split = assemble_hessian(lag, disc, &zero)?;
        let garding = garding_constants(&split, disc)?;
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let v = disc.random_field(&mut rng, 1.0);
            let lhs = v.dot(&(&split.b * &v));
            let rhs = garding.c1 * disc.inner(&v, &v) - garding.c2 * v.dot(&(disc.gram_low() * &v));
            worst = worst.min((lhs - rhs) / disc.inner(&v, &v));
        }
        audits.push(AuditLine::new(
            "garding-inequality",
            worst >= -1e-10,
            format!(
                "C1 {:.4e}, C2 {:.4e}, min slack {worst:.3e}",
                garding.c1, garding.c2
            ),
        ));
        let decay = q_decay_profile(&split, disc);
        if decay.applicable {
            audits.push(AuditLine::new(
                "compact-part-decay",
                decay.passed,
                format!(
                    "last/max ratio {:.3e}",
                    decay.last_ratio / decay.max_ratio.max(f64::MIN_POSITIVE)
                ),
            ));
        }
        result["derivatives"]["max_hessian_error"] = json!(hess_err);
        result["split"] =
            json!({"max_relative_defect": split_defect, "symmetric": symmetric, "min_c0": min_c0});
        result["garding"] = json!({"c1": garding.c1, "c2": garding.c2, "min_slack": worst});
        result["compactness"] = json!({
            "applicable": decay.applicable,
            "max_ratio": decay.max_ratio,
            "last_ratio": decay.last_ratio,
            "passed": decay.passed,
        });
    }
    Ok(Outputs {
        result,
        audits,
        files: Vec::new(),
    })
}

#[derive(Serialize)]
struct MorseRow {
    lambda: f64,
    formula: Option<usize>,
    direct: usize,
    nullity: usize,
    error: Option<String>,
}

pub fn spectrum(fam: &ParamFunctional, settings: &Settings, out: &Path) -> Result<Outputs> {
    let (f, g, p) = pencil_at_zero(fam)?;
    let disc = fam.disc();
    write_spectrum_csv(&out.join("spectrum.csv"), &p)?;
    let mode = match p.f_definiteness {
        Definiteness::Positive => MorseMode::PositiveDefinite,
        Definiteness::Negative => MorseMode::NegativeDefinite,
        Definiteness::Indefinite => MorseMode::InvariantSubspaces,
    };
    let mut audits = Vec::new();
    let mut rows = Vec::new();
    for &lam in settings.lambdas.as_deref().unwrap_or(&[]) {
        let dec = decompose(&(&f - &g * lam), disc.gram(), None)?;
        let (formula, error) = match morse_index_by_formula(&p, lam, mode) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        if let Some(c) = formula {
            audits.push(AuditLine::new(
                format!("morse-formula λ={lam}"),
                c == dec.morse_index,
                format!("formula {c}, direct {}", dec.morse_index),
            ));
        }
        rows.push(MorseRow {
            lambda: lam,
            formula,
            direct: dec.morse_index,
            nullity: dec.nullity,
            error,
        });
    }
    let mut jumps = Vec::new();
    for grp in p.groups.iter().take(8) {
        let r = index_jump_report(
            &p,
            &f,
            &g,
            disc.gram(),
            grp.lambda,
            jump_epsilon(&p, grp.lambda),
        );
        audits.push(AuditLine::new(
            format!("index-jump λ*={:.6}", grp.lambda),
            r.consistent,
            match &r.jump {
                Some(j) => format!("μ⁻ {} μ⁺ {} ν {}", j.mu_minus, j.mu_plus, j.nu),
                None => r.error.clone().unwrap_or_default(),
            },
        ));
        jumps.push(r);
    }
    let groups: Vec<Value> = p
        .groups
        .iter()
        .map(|g| json!({"lambda": g.lambda, "multiplicity": g.multiplicity, "inertia": [g.inertia.0, g.inertia.1, g.inertia.2]}))
        .collect();
    Ok(Outputs {
        result: json!({
            "pencil": to_value(&PencilSummary::of(&p)),
            "f_definiteness": to_value(&p.f_definiteness),
            "groups": groups,
            "kernel_inertia": [p.kernel_inertia.0, p.kernel_inertia.1, p.kernel_inertia.2],
            "max_residual": p.max_residual,
            "morse_indices": to_value(&rows),
            "index_jumps": to_value(&jumps),
        }),
        audits,
        files: vec!["spectrum.csv".into()],
    })
}

pub fn reduce(
    fam: &ParamFunctional,
    settings: &Settings,
    out: &Path,
    seed: u64,
) -> Result<Outputs> {
    let (_, _, p) = pencil_at_zero(fam)?;
    let lambda_star = match settings.lambda_star {
        Some(l) => l,
        None => p
            .groups
            .iter()
            .map(|g| g.lambda)
            .find(|l| *l > 0.0)
            .ok_or_else(|| {
                VeldtError::Configuration(
                    "pencil has no positive eigenvalue; set lambda_star".into(),
                )
            })?,
    };
    let setup = ReductionSetup::new(
        fam.clone(),
        fam.disc().zero(),
        &[lambda_star],
        SetupOptions {
            kernel_dim_hint: settings.kernel_dim_hint,
            ..SetupOptions::default()
        },
    )?;
    let rho = setup.trust_radius();
    let nu = setup.kernel_dim();
    let offset = 0.2 * setup.lambda_box();
    let lambdas = settings
        .lambdas
        .clone()
        .unwrap_or_else(|| vec![lambda_star - offset, lambda_star, lambda_star + offset]);
    let (z0, z1) = settings.z_range.unwrap_or((-0.5 * rho, 0.5 * rho));
    let count = settings.z_points.unwrap_or(21).max(2);
    let zs: Vec<DVector<f64>> = (0..count)
        .map(|i| {
            let t = z0 + (z1 - z0) * i as f64 / (count - 1) as f64;
            DVector::from_fn(nu, |k, _| if k == 0 { t } else { 0.0 })
        })
        .collect();
    let mut audits = Vec::new();
    let mut samples = Vec::new();
    let mut per_lambda = Vec::new();
    for (li, &lam) in lambdas.iter().enumerate() {
        let run = setup.continuation(&[lam], &zs)?;
        let mut worst = 0.0f64;
        for (smp, z) in run.iter().zip(&zs) {
            let u = setup.kernel_field(z);
            let scale = 1.0 + fam.disc().dual_norm(&fam.gradient(&[lam], &u)?);
            worst = worst.max(smp.residual / scale);
        }
        audits.push(AuditLine::new(
            format!("complement-residual λ={lam}"),
            worst < PSI_TOL,
            format!("max scaled residual {worst:.3e}"),
        ));
        let origin = setup.solve_psi(&[lam], &DVector::zeros(nu), PSI_TOL, None)?;
        audits.push(AuditLine::new(
            format!("psi-at-origin λ={lam}"),
            origin.w.iter().all(|v| *v == 0.0),
            format!("‖ψ(λ,0)‖ = {:.3e}", origin.w.norm()),
        ));
        let lip = lipschitz_audit(&setup, &[lam], 10, 0.5 * rho, seed.wrapping_add(li as u64))?;
        audits.push(AuditLine::new(
            format!("lipschitz λ={lam}"),
            lip.passed,
            format!("max ratio {:.4e} (bound {})", lip.max_ratio, lip.bound),
        ));
        let zt = DVector::from_fn(nu, |k, _| if k == 0 { 0.3 * rho } else { 0.0 });
        let uniq = uniqueness_probe(&setup, &[lam], &zt, 10, seed.wrapping_add(100 + li as u64))?;
        audits.push(AuditLine::new(
            format!("uniqueness λ={lam}"),
            uniq.passed,
            format!(
                "{}/{} converged, max pairwise {:.3e}",
                uniq.converged, uniq.starts, uniq.max_pairwise
            ),
        ));
        let hess = match reduced_hessian_at_origin(&setup, &[lam]) {
            Ok(h) => {
                json!({"relative_error": h.relative_error, "closed_form": h.closed_form.iter().collect::<Vec<_>>()})
            }
            Err(e) => json!({"error": e.to_string()}),
        };
        let hess_ok = hess.get("relative_error").is_some();
        audits.push(AuditLine::new(
            format!("reduced-hessian-identity λ={lam}"),
            hess_ok,
            hess.get("relative_error")
                .and_then(Value::as_f64)
                .map(|e| format!("relative error {e:.3e}"))
                .unwrap_or_else(|| hess["error"].as_str().unwrap_or_default().to_string()),
        ));
        per_lambda.push(json!({
            "lambda": lam,
            "max_scaled_residual": worst,
            "lipschitz": to_value(&lip),
            "uniqueness": to_value(&uniq),
            "reduced_hessian": hess,
        }));
        samples.extend(run);
    }
    write_reduced_csv(&out.join("reduced.csv"), &samples)?;
    Ok(Outputs {
        result: json!({
            "lambda_star": lambda_star,
            "kernel_dim": nu,
            "morse_index": setup.morse_index(),
            "trust_radius": rho,
            "lambda_box": setup.lambda_box(),
            "samples": to_value(&samples),
            "audits": per_lambda,
        }),
        audits,
        files: vec!["reduced.csv".into()],
    })
}

pub fn bifurcate(
    fam: &ParamFunctional,
    settings: &Settings,
    out: &Path,
    seed: u64,
) -> Result<Outputs> {
    let defaults = BranchOptions::default();
    let opts = BranchOptions {
        window: settings.window.unwrap_or(defaults.window),
        grid: settings.grid.unwrap_or(defaults.grid),
        amplitude_cap: settings.amplitude_cap.unwrap_or(defaults.amplitude_cap),
        starts: settings.starts.unwrap_or(defaults.starts),
        min_amplitude: settings.min_amplitude.unwrap_or(defaults.min_amplitude),
        seed,
        ..defaults
    };
    let report = detect_branches(fam, &fam.disc().zero(), opts)?;
    write_branch_csv(&out.join("branches.csv"), &report)?;
    let (_, _, p) = pencil_at_zero(fam)?;
    write_spectrum_csv(&out.join("spectrum.csv"), &p)?;
    let mut audits = Vec::new();
    for c in &report.candidates {
        let tag = format!("λ*={:.6}", c.lambda_star);
        audits.push(AuditLine::new(
            format!("necessary-condition {tag}"),
            c.necessary.passed,
            format!("multiplicity {}", c.multiplicity),
        ));
        audits.push(AuditLine::new(
            format!("index-jump {tag}"),
            c.index_jump.consistent,
            c.index_jump
                .error
                .clone()
                .unwrap_or_else(|| "direct count matches formula".into()),
        ));
        let worst = c
            .branches
            .iter()
            .flat_map(|b| b.points.iter())
            .map(|p| p.residual)
            .fold(0.0f64, f64::max);
        audits.push(AuditLine::new(
            format!("branch-residuals {tag}"),
            worst < 1e-10,
            format!("max residual {worst:.3e}"),
        ));
        if c.condition != ConditionClass::None {
            audits.push(AuditLine::new(
                format!("bifurcation-detected {tag}"),
                c.alternative != Alternative::Undetected,
                format!(
                    "condition {:?}, alternative {:?}",
                    c.condition, c.alternative
                ),
            ));
        }
    }
    Ok(Outputs {
        result: to_value(&report),
        audits,
        files: vec!["branches.csv".into(), "spectrum.csv".into()],
    })
}

pub fn morse(fam: &ParamFunctional, settings: &Settings, seed: u64) -> Result<Outputs> {
    let lambda = settings
        .lambda
        .ok_or_else(|| VeldtError::Configuration("morse needs settings.lambda".into()))?;
    let defaults = CensusOptions::default();
    let opts = CensusOptions {
        starts: settings.starts.unwrap_or(defaults.starts),
        radius: settings.radius.unwrap_or(defaults.radius),
        modes: settings.modes.unwrap_or(defaults.modes),
        seed,
        ..defaults
    };
    let audit = morse_inequality_audit(fam, lambda, settings.levels, opts)?;
    let mut audits = Vec::new();
    if settings.levels.is_none() {
        audits.push(AuditLine::new(
            "morse-identity",
            audit.euler_holds,
            format!("Σ(−1)^q N_q = {}", audit.euler),
        ));
    }
    audits.push(AuditLine::new(
        "morse-inequalities",
        audit.partial_sums.iter().all(|p| p.holds),
        format!("N_q = {:?}", audit.counts),
    ));
    audits.push(AuditLine::new(
        "coercivity-rays",
        audit.coercive,
        "growth along sampled rays".to_string(),
    ));
    Ok(Outputs {
        result: to_value(&audit),
        audits,
        files: Vec::new(),
    })
}
