use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;

use super::conditions::{
    classify_conditions, index_jump_report, jump_epsilon, necessary_test, ConditionClass,
    IndexJumpReport, NecessaryVerdict,
};
use super::orbit::orbit_group;
use crate::error::{Result, VeldtError};
use crate::galerkin::BoundaryCondition;
use crate::reduction::{
    find_critical_point, regularized_solve, Functional, NewtonOptions, ParamFunctional,
    ReducedSample, ReductionSetup, SetupOptions,
};
use crate::spectral::{decompose, pencil_eigs, same_group, PencilSpectrum};

/// Observed bifurcation pattern near `λ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// Nontrivial solutions at `λ*` itself.
    I,
    /// Solution count at fixed `λ` exceeds the cap and grows under refinement.
    Ii,
    /// Nontrivial solutions on both sides of `λ*`.
    Iii,
    /// At least two nontrivial solutions at some `λ` on one side.
    Iv,
    Undetected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    /// `‖u − u₀‖_{m,2}`.
    pub amplitude: f64,
    /// `sup |u − u₀|` over a uniform grid.
    pub sup_amplitude: f64,
    pub z: Vec<f64>,
    pub reduced_value: f64,
    pub residual: f64,
    pub morse_index: usize,
    pub nullity: usize,
    pub orbit_tag: Option<usize>,
    #[serde(skip)]
    pub u: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub id: usize,
    pub lambda_star: f64,
    /// `-1` below `λ*`, `+1` above, `0` at `λ*`.
    pub side: i8,
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridGap {
    pub lambda: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    pub lambda_star: f64,
    pub multiplicity: usize,
    pub necessary: NecessaryVerdict,
    pub condition: ConditionClass,
    pub index_jump: IndexJumpReport,
    pub trust_radius: f64,
    pub alternative: Alternative,
    pub observed: Vec<Alternative>,
    /// `(λ, number of distinct nontrivial solutions)` over the grid.
    pub counts: Vec<(f64, usize)>,
    pub branches: Vec<Branch>,
    pub gaps: Vec<GridGap>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilSummary {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub kernel_dim: usize,
    pub f_condition: f64,
}

impl PencilSummary {
    pub fn of(p: &PencilSpectrum) -> Self {
        Self {
            eigenvalues: p.eigenvalues(),
            multiplicities: p.groups.iter().map(|g| g.multiplicity).collect(),
            kernel_dim: p.kernel.ncols(),
            f_condition: p.f_condition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationReport {
    pub window: (f64, f64),
    pub spectrum: PencilSummary,
    pub candidates: Vec<CandidateReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOptions {
    pub window: (f64, f64),
    /// Number of uniformly spaced `λ` values in the window (inclusive).
    pub grid: usize,
    /// Largest `‖z‖` used for multistart, clipped to the trust radius.
    pub amplitude_cap: f64,
    pub starts: usize,
    /// Reduced solutions with `‖z‖` below this are identified with `u₀`.
    pub min_amplitude: f64,
    /// Solution count at one `λ` that triggers the refinement test for alternative (ii).
    pub solution_cap: usize,
    pub seed: u64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            window: (0.0, 1.0),
            grid: 51,
            amplitude_cap: f64::INFINITY,
            starts: 8,
            min_amplitude: 1e-3,
            solution_cap: 16,
            seed: 0,
        }
    }
}

const REDUCED_TOL: f64 = 1e-12;
const POLISH_TOL: f64 = 1e-11;
const DEDUP_TOL: f64 = 1e-6;

/// Newton's method on `∇𝓛°_λ(z) = 0` inside the trust radius.
pub fn reduced_newton(
    setup: &ReductionSetup,
    lambda: &[f64],
    z0: &DVector<f64>,
) -> Result<ReducedSample> {
    let rho = setup.trust_radius();
    let mut s = setup.reduce(lambda, z0, None)?;
    let gnorm = |s: &ReducedSample| s.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut res = gnorm(&s);
    for it in 0..80 {
        if res < REDUCED_TOL {
            return Ok(s);
        }
        let h = setup.reduced_hessian(&s)?;
        let g = DVector::from_column_slice(&s.gradient);
        let eye = DMatrix::identity(h.nrows(), h.ncols());
        let step = regularized_solve(&h, &eye, &g).ok_or(VeldtError::NewtonFailure {
            iterations: it,
            residual: res,
        })?;
        let z = DVector::from_column_slice(&s.z);
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let trial = &z + &step * alpha;
            if trial.norm() <= rho {
                if let Ok(t) = setup.reduce(lambda, &trial, Some(&s.psi)) {
                    if gnorm(&t) < res {
                        next = Some(t);
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        match next {
            Some(t) => {
                res = gnorm(&t);
                s = t;
            }
            None => {
                return Err(VeldtError::NewtonFailure {
                    iterations: it,
                    residual: res,
                })
            }
        }
    }
    if res < REDUCED_TOL {
        Ok(s)
    } else {
        Err(VeldtError::NewtonFailure {
            iterations: 80,
            residual: res,
        })
    }
}

fn multistarts(nu: usize, cap: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    if nu == 1 {
        let half = count.div_ceil(2).max(1);
        (1..=half)
            .flat_map(|i| {
                let a = cap * i as f64 / half as f64;
                [DVector::from_element(1, a), DVector::from_element(1, -a)]
            })
            .collect()
    } else {
        (0..count)
            .map(|i| {
                let dir = DVector::from_fn(nu, |_, _| rng.gen_range(-1.0..1.0)).normalize();
                dir * (cap * (i as f64 + 1.0) / count as f64)
            })
            .collect()
    }
}

struct Found {
    point: BranchPoint,
}

fn solve_at(
    setup: &ReductionSetup,
    lambda: f64,
    starts: &[DVector<f64>],
    opts: &BranchOptions,
) -> Result<Vec<Found>> {
    let fam = setup.family();
    let disc = fam.disc();
    let u0 = setup.base_point();
    let f = fam.at(&[lambda])?;
    let mut out: Vec<Found> = Vec::new();
    let mut last_err = None;
    for z0 in starts {
        let s = match reduced_newton(setup, &[lambda], z0) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        if s.z.iter().map(|v| v * v).sum::<f64>().sqrt() < opts.min_amplitude {
            continue;
        }
        let lifted = setup.lift(&s);
        let polished = find_critical_point(
            &f,
            &lifted,
            NewtonOptions {
                tol: POLISH_TOL,
                max_iter: 30,
                max_step: 0.1 * setup.trust_radius(),
            },
        )?;
        let u = polished.u;
        if out
            .iter()
            .any(|o| disc.norm(&(&o.point.u - &u)) < DEDUP_TOL)
        {
            continue;
        }
        let dec = decompose(&f.hessian(&u)?, disc.gram(), None)?;
        let diff = &u - u0;
        out.push(Found {
            point: BranchPoint {
                lambda,
                amplitude: disc.norm(&diff),
                sup_amplitude: disc.sup_norm(&diff, 401),
                z: s.z.clone(),
                reduced_value: s.value,
                residual: polished.residual,
                morse_index: dec.morse_index,
                nullity: dec.nullity,
                orbit_tag: None,
                u,
            },
        });
    }
    if out.is_empty() {
        if let Some(e) = last_err {
            if !starts.is_empty()
                && matches!(
                    e,
                    VeldtError::ReductionFailure { .. } | VeldtError::Degeneracy(_)
                )
            {
                return Err(e);
            }
        }
    }
    Ok(out)
}

fn lambda_grid(window: (f64, f64), grid: usize) -> Vec<f64> {
    let n = grid.max(2);
    (0..n)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64)
        .collect()
}

fn tag_orbits(points: &mut [&mut BranchPoint], disc: &crate::galerkin::Discretization) {
    let fields: Vec<DVector<f64>> = points.iter().map(|p| p.u.clone()).collect();
    if let Ok(rep) = orbit_group(&fields, disc, 1e-6) {
        for (p, tag) in points.iter_mut().zip(rep.labels) {
            p.orbit_tag = Some(tag);
        }
    }
}

/// Scans the window for pencil eigenvalues and follows the bifurcating branches near each.
pub fn detect_branches(
    family: &ParamFunctional,
    u0: &DVector<f64>,
    opts: BranchOptions,
) -> Result<BifurcationReport> {
    if family.n_params() != 1 {
        return Err(VeldtError::Capability(
            "branch detection supports one parameter".into(),
        ));
    }
    if !(opts.window.0 < opts.window.1) {
        return Err(VeldtError::Configuration(format!(
            "empty window {:?}",
            opts.window
        )));
    }
    let disc = family.disc();
    let f_hess = family.f_hessian(u0)?;
    let g_hess = family.g_hessians(u0)?.remove(0);
    let pencil = pencil_eigs(&f_hess, &g_hess, disc.gram())?;
    let grid = lambda_grid(opts.window, opts.grid);
    let periodic = disc.spec().bc == BoundaryCondition::Periodic;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidates = Vec::new();
    for grp in pencil
        .groups
        .iter()
        .filter(|g| g.lambda >= opts.window.0 && g.lambda <= opts.window.1)
    {
        let ls = grp.lambda;
        let necessary = necessary_test(&pencil, ls);
        let condition = classify_conditions(&f_hess, disc.gram(), &pencil, ls)?;
        let eps = jump_epsilon(&pencil, ls);
        let jump = index_jump_report(&pencil, &f_hess, &g_hess, disc.gram(), ls, eps);
        let setup = ReductionSetup::new(
            family.clone(),
            u0.clone(),
            &[ls],
            SetupOptions {
                kernel_dim_hint: Some(grp.multiplicity),
                ..SetupOptions::default()
            },
        )?;
        let cap = opts.amplitude_cap.min(setup.trust_radius());
        let nu = setup.kernel_dim();
        let base_starts = multistarts(nu, cap, opts.starts, &mut rng);
        let mut lambdas: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|l| (l - ls).abs() <= setup.lambda_box() && !same_group(*l, ls))
            .collect();
        lambdas.push(ls);
        // Process outward from λ* on each side so branches can seed the next grid point.
        lambdas.sort_by(|a, b| {
            (a - ls)
                .abs()
                .total_cmp(&(b - ls).abs())
                .then(a.total_cmp(b))
        });
        let mut branches: Vec<Branch> = Vec::new();
        let mut counts = Vec::new();
        let mut gaps = Vec::new();
        let mut at_star = 0;
        let mut grows = false;
        for &lam in &lambdas {
            let side: i8 = if same_group(lam, ls) {
                0
            } else if lam < ls {
                -1
            } else {
                1
            };
            let mut starts = base_starts.clone();
            for b in branches.iter().filter(|b| b.side == side) {
                if let Some(p) = b.points.last() {
                    starts.insert(0, DVector::from_column_slice(&p.z));
                }
            }
            let found = match solve_at(&setup, lam, &starts, &opts) {
                Ok(f) => f,
                Err(e) => {
                    gaps.push(GridGap {
                        lambda: lam,
                        error: e.to_string(),
                    });
                    continue;
                }
            };
            let mut count = found.len();
            if side != 0 && count >= opts.solution_cap {
                let more = multistarts(nu, cap, 2 * opts.starts, &mut rng);
                if let Ok(refined) = solve_at(&setup, lam, &more, &opts) {
                    if refined.len() > count {
                        grows = true;
                        count = refined.len();
                    }
                }
            }
            counts.push((lam, count));
            if side == 0 {
                at_star = count;
            }
            // Nearest-neighbour continuation of existing branches on this side.
            let mut used = vec![false; found.len()];
            let step = 0.5 * setup.trust_radius();
            for b in branches.iter_mut().filter(|b| b.side == side) {
                let last = b.points.last().expect("branches are never empty").u.clone();
                let best = found
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !used[*i])
                    .map(|(i, f)| (i, disc.norm(&(&f.point.u - &last))))
                    .filter(|(_, d)| *d < step)
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((i, _)) = best {
                    used[i] = true;
                    b.points.push(found[i].point.clone());
                }
            }
            for (i, f) in found.into_iter().enumerate() {
                if !used[i] {
                    branches.push(Branch {
                        id: 0,
                        lambda_star: ls,
                        side,
                        points: vec![f.point],
                    });
                }
            }
        }
        for b in &mut branches {
            b.points.sort_by(|p, q| p.lambda.total_cmp(&q.lambda));
        }
        branches.sort_by(|a, b| {
            a.side
                .cmp(&b.side)
                .then(a.points[0].z[0].total_cmp(&b.points[0].z[0]))
        });
        for (i, b) in branches.iter_mut().enumerate() {
            b.id = i;
        }
        counts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if periodic {
            let mut by_lambda: Vec<f64> = counts.iter().map(|c| c.0).collect();
            by_lambda.dedup();
            for lam in by_lambda {
                let mut pts: Vec<&mut BranchPoint> = branches
                    .iter_mut()
                    .flat_map(|b| b.points.iter_mut())
                    .filter(|p| p.lambda == lam)
                    .collect();
                tag_orbits(&mut pts, disc);
            }
        }
        let below = counts
            .iter()
            .any(|(l, c)| *l < ls && !same_group(*l, ls) && *c > 0);
        let above = counts
            .iter()
            .any(|(l, c)| *l > ls && !same_group(*l, ls) && *c > 0);
        let multi = counts.iter().any(|(l, c)| !same_group(*l, ls) && *c >= 2);
        let mut observed = Vec::new();
        if at_star > 0 {
            observed.push(Alternative::I);
        }
        if grows {
            observed.push(Alternative::Ii);
        }
        if below && above {
            observed.push(Alternative::Iii);
        }
        if multi {
            observed.push(Alternative::Iv);
        }
        candidates.push(CandidateReport {
            lambda_star: ls,
            multiplicity: grp.multiplicity,
            necessary,
            condition,
            index_jump: jump,
            trust_radius: setup.trust_radius(),
            alternative: observed.first().copied().unwrap_or(Alternative::Undetected),
            observed,
            counts,
            branches,
            gaps,
        });
    }
    Ok(BifurcationReport {
        window: opts.window,
        spectrum: PencilSummary::of(&pencil),
        candidates,
    })
}

/// Branch samples as CSV: `branch, lambda_star, lambda, amplitude, sup_amplitude, mu, nu, orbit_tag`.
pub fn write_branch_csv(path: &Path, report: &BifurcationReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "branch",
        "lambda_star",
        "lambda",
        "amplitude",
        "sup_amplitude",
        "mu",
        "nu",
        "orbit_tag",
    ])?;
    for c in &report.candidates {
        for b in &c.branches {
            for p in &b.points {
                w.write_record([
                    b.id.to_string(),
                    format!("{:.12e}", c.lambda_star),
                    format!("{:.12e}", p.lambda),
                    format!("{:.12e}", p.amplitude),
                    format!("{:.12e}", p.sup_amplitude),
                    p.morse_index.to_string(),
                    p.nullity.to_string(),
                    p.orbit_tag.map_or(String::new(), |t| t.to_string()),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
