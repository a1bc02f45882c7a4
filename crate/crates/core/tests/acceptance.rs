//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veldt::bifurcation::{
    detect_branches, morse_inequality_audit, orbit_group, BranchOptions, CensusOptions,
};
use veldt::galerkin::{
    assemble_dual_gradient, assemble_functional, assemble_hessian, build_space, garding_constants,
    q_compactness_audit, BoundaryCondition, Discretization, Domain, SpaceSpec,
};
use veldt::lagrangian::{catalog, Lagrangian};
use veldt::reduction::{
    lipschitz_audit, marino_prodi_audit, uniqueness_probe, Functional, ParamFunctional,
    PerturbOptions, ReductionSetup, SetupOptions, PSI_TOL,
};
use veldt::spectral::{index_jump, pencil_eigs, PencilSpectrum};

type Verdict = (bool, String);

fn interval(a: f64, b: f64, m: usize, bc: BoundaryCondition, k: usize) -> Discretization {
    build_space(&SpaceSpec::new(Domain::interval(a, b), m, bc, k)).unwrap()
}

fn sine(k: usize) -> Discretization {
    interval(0.0, PI, 1, BoundaryCondition::Dirichlet, k)
}

fn beam(k: usize) -> Discretization {
    interval(0.0, 1.0, 2, BoundaryCondition::Dirichlet, k)
}

fn family(f: Lagrangian, disc: Discretization) -> ParamFunctional {
    let (n, m) = (disc.n(), disc.m());
    ParamFunctional::new(f, vec![catalog::mass(n, m, 1).unwrap()], disc).unwrap()
}

fn pencil(fam: &ParamFunctional) -> (DMatrix<f64>, DMatrix<f64>, PencilSpectrum) {
    let u0 = fam.disc().zero();
    let f = fam.f_hessian(&u0).unwrap();
    let g = fam.g_hessians(&u0).unwrap().remove(0);
    let p = pencil_eigs(&f, &g, fam.disc().gram()).unwrap();
    (f, g, p)
}

/// First positive root of `cos μ cosh μ = 1` by bisection.
fn clamped_root() -> f64 {
    let h = |x: f64| x.cos() * x.cosh() - 1.0;
    let (mut a, mut b) = (4.0, 5.0);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if h(a) * h(c) <= 0.0 {
            b = c;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn c1_pencil() -> Verdict {
    let t = Instant::now();
    let (_, _, p) = pencil(&family(catalog::p1(1).unwrap(), sine(64)));
    let t1 = t.elapsed().as_secs_f64();
    let worst = (1..=5)
        .map(|k| ((p.groups[k - 1].lambda - (k * k) as f64) / (k * k) as f64).abs())
        .fold(0.0f64, f64::max);
    let t = Instant::now();
    let (_, _, q) = pencil(&family(catalog::p4().unwrap(), beam(12)));
    let t4 = t.elapsed().as_secs_f64();
    let mu4 = clamped_root().powi(4);
    let e4 = ((q.groups[0].lambda - mu4) / mu4).abs();
    (
        worst < 1e-3 && e4 < 5e-3 && t1 < 5.0 && t4 < 5.0,
        format!(
            "P1 max rel err {worst:.2e} ({t1:.2} s); P4 λ₁ {:.4} vs μ₁⁴ {mu4:.4}, rel err {e4:.2e} ({t4:.2} s)",
            q.groups[0].lambda
        ),
    )
}

fn richardson<T>(h: f64, d: impl Fn(f64) -> T) -> T
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    let coarse = d(h);
    let fine = d(0.5 * h);
    (fine * 4.0 - coarse) * (1.0 / 3.0)
}

fn c2_derivatives() -> Verdict {
    let cases: Vec<(&str, Lagrangian, Discretization)> = vec![
        ("P1", catalog::p1(1).unwrap(), sine(12)),
        ("P2", catalog::p2(1).unwrap(), sine(12)),
        ("P3", catalog::p3(1).unwrap(), sine(12)),
        ("P4", catalog::p4().unwrap(), beam(8)),
    ];
    let mut worst_g = 0.0f64;
    let mut worst_h = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-3;
    for (_, lag, disc) in &cases {
        for _ in 0..200 {
            let r = rng.gen_range(0.1..2.0);
            let u = disc.random_field(&mut rng, r);
            let n = disc.dim();
            let ell = assemble_dual_gradient(lag, disc, &u).unwrap();
            let hess = assemble_hessian(lag, disc, &u).unwrap().b;
            let mut fd_g = DVector::zeros(n);
            let mut fd_h = DMatrix::zeros(n, n);
            for k in 0..n {
                let e = DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
                fd_g[k] = richardson(h, |t| {
                    (assemble_functional(lag, disc, &(&u + &e * t)).unwrap()
                        - assemble_functional(lag, disc, &(&u - &e * t)).unwrap())
                        / (2.0 * t)
                });
                let col = richardson(h, |t| {
                    (assemble_dual_gradient(lag, disc, &(&u + &e * t)).unwrap()
                        - assemble_dual_gradient(lag, disc, &(&u - &e * t)).unwrap())
                        / (2.0 * t)
                });
                fd_h.set_column(k, &col);
            }
            worst_g = worst_g.max((&fd_g - &ell).norm() / ell.norm());
            worst_h = worst_h.max((&fd_h - &hess).norm() / hess.norm());
        }
    }
    (
        worst_g < 1e-6 && worst_h < 1e-6,
        format!(
            "P1–P4, 200 fields each: gradient rel err {worst_g:.2e}, Hessian rel err {worst_h:.2e}"
        ),
    )
}

fn c3_split() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut defect = 0.0f64;
    let mut min_c0 = f64::INFINITY;
    let cases: Vec<(Lagrangian, Discretization)> = vec![
        (catalog::p1(1).unwrap(), sine(16)),
        (catalog::p2(1).unwrap(), sine(16)),
        (catalog::p3(1).unwrap(), sine(16)),
        (catalog::p4().unwrap(), beam(8)),
    ];
    let mut slack = f64::INFINITY;
    for (lag, disc) in &cases {
        for _ in 0..50 {
            let r = rng.gen_range(0.0..3.0);
            let u = disc.random_field(&mut rng, r);
            let split = assemble_hessian(lag, disc, &u).unwrap();
            defect = defect.max(split.check().relative_defect);
            // Independent check of P positivity: Cholesky of P must succeed.
            let sym = (&split.p + split.p.transpose()) * 0.5;
            let ok = sym.clone().cholesky().is_some();
            min_c0 = min_c0.min(if ok { split.c0_estimate } else { -1.0 });
        }
        let u = disc.random_field(&mut rng, 1.0);
        let split = assemble_hessian(lag, disc, &u).unwrap();
        let g = garding_constants(&split, disc).unwrap();
        for _ in 0..100 {
            let v = disc.random_field(&mut rng, 1.0);
            let lhs = v.dot(&(&split.b * &v));
            let rhs = g.c1 * disc.inner(&v, &v) - g.c2 * v.dot(&(disc.gram_low() * &v));
            slack = slack.min(lhs - rhs);
        }
    }
    let disc = sine(64);
    let u = disc.random_field(&mut rng, 1.0);
    let decay = q_compactness_audit(&catalog::p3(1).unwrap(), &u, &disc).unwrap();
    (
        defect < 1e-12 && min_c0 > 0.0 && decay.passed && slack >= -1e-12,
        format!(
            "max defect {defect:.2e}, min C0 {min_c0:.3e}, Q decay last/max {:.2e} at K=64, Gårding min slack {slack:.2e}",
            decay.last_ratio / decay.max_ratio
        ),
    )
}

fn c4_index_jump() -> Verdict {
    let fam = family(catalog::p1(1).unwrap(), sine(32));
    let (f, g, p) = pencil(&fam);
    let mut ok = true;
    let mut parts = Vec::new();
    for ls in [1.0, 4.0, 9.0] {
        let grp = p.find(ls).unwrap();
        match index_jump(&p, &f, &g, fam.disc().gram(), grp.lambda, 0.1) {
            Ok(j) => {
                let jump = j.mu_plus as i64 - j.mu_minus as i64;
                ok &= jump == grp.multiplicity as i64 && j.nu == grp.multiplicity;
                parts.push(format!(
                    "λ*={ls}: μ {}→{} ν {}",
                    j.mu_minus, j.mu_plus, j.nu
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("λ*={ls}: {e}"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn p2_setup(k: usize) -> ReductionSetup {
    let fam = family(catalog::p2(1).unwrap(), sine(k));
    let u0 = fam.disc().zero();
    ReductionSetup::new(fam, u0, &[1.0], SetupOptions::default()).unwrap()
}

fn c5_reduction() -> Verdict {
    let s = p2_setup(64);
    let rho = s.trust_radius();
    let zs: Vec<DVector<f64>> = (0..21)
        .map(|i| DVector::from_element(1, -0.5 * rho + 0.05 * rho * i as f64))
        .collect();
    let mut worst = 0.0f64;
    let mut zero_ok = true;
    let mut lip = 0.0f64;
    let mut uniq_ok = true;
    let mut pairwise = 0.0f64;
    for (i, lam) in [0.9, 0.95, 1.0, 1.05, 1.1].into_iter().enumerate() {
        for (smp, z) in s.continuation(&[lam], &zs).unwrap().iter().zip(&zs) {
            let u = s.kernel_field(z);
            let scale = 1.0
                + s.family()
                    .disc()
                    .dual_norm(&s.family().gradient(&[lam], &u).unwrap());
            worst = worst.max(smp.residual / scale);
        }
        let psi0 = s
            .solve_psi(&[lam], &DVector::zeros(1), PSI_TOL, None)
            .unwrap();
        zero_ok &= psi0.w.iter().all(|v| *v == 0.0);
        let a = lipschitz_audit(&s, &[lam], 20, 0.5 * rho, i as u64).unwrap();
        lip = lip.max(a.max_ratio);
        let z = DVector::from_element(1, 0.3 * rho);
        let u = uniqueness_probe(&s, &[lam], &z, 10, 10 + i as u64).unwrap();
        uniq_ok &= u.passed;
        pairwise = pairwise.max(u.max_pairwise);
    }
    (
        worst < 1e-11 && zero_ok && lip <= 3.0 && uniq_ok,
        format!(
            "max scaled residual {worst:.2e} on 21×5 grid, ψ(λ,0)=0 {zero_ok}, Lipschitz {lip:.3e}, uniqueness pairwise {pairwise:.2e}"
        ),
    )
}

fn c6_normal_form() -> Verdict {
    let s = p2_setup(64);
    let lam = 1.05;
    let amps: Vec<f64> = (1..=30).map(|i| 0.01 * i as f64).collect();
    let zs: Vec<DVector<f64>> = amps
        .iter()
        .map(|a| DVector::from_element(1, a * PI.sqrt()))
        .collect();
    let samples = s.continuation(&[lam], &zs).unwrap();
    let x = DMatrix::from_fn(amps.len(), 2, |i, j| amps[i].powi(2 * (j as i32 + 1)));
    let y = DVector::from_iterator(amps.len(), samples.iter().map(|s| s.value));
    let c = (x.transpose() * &x)
        .lu()
        .solve(&(x.transpose() * y))
        .unwrap();
    let quad = PI / 4.0 * (1.0 - lam);
    let quart = 3.0 * PI / 32.0;
    let (eq, e4) = (((c[0] - quad) / quad).abs(), ((c[1] - quart) / quart).abs());
    (
        eq < 0.01 && e4 < 0.01,
        format!(
            "quadratic {:.5} vs {quad:.5} ({eq:.1e}), quartic {:.5} vs {quart:.5} ({e4:.1e})",
            c[0], c[1]
        ),
    )
}

fn c7_pitchfork() -> Verdict {
    let fam = family(catalog::p2(1).unwrap(), sine(64));
    let u0 = fam.disc().zero();
    let t = Instant::now();
    let rep = detect_branches(
        &fam,
        &u0,
        BranchOptions {
            window: (0.8, 1.3),
            grid: 51,
            ..BranchOptions::default()
        },
    )
    .unwrap();
    let secs = t.elapsed().as_secs_f64();
    let pts: Vec<_> = rep
        .candidates
        .iter()
        .flat_map(|c| c.branches.iter())
        .flat_map(|b| b.points.iter())
        .filter(|p| p.z[0] > 0.0)
        .collect();
    let at = |l: f64| {
        pts.iter()
            .find(|p| (p.lambda - l).abs() < 1e-9)
            .map(|p| p.sup_amplitude)
    };
    let oracle = 2.0 * (0.05f64 / 3.0).sqrt();
    let a = at(1.05).unwrap_or(f64::NAN);
    let err = ((a - oracle) / oracle).abs();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..=9)
        .filter_map(|i| {
            let l = 1.01 + 0.01 * i as f64;
            at(l).map(|v| ((l - 1.0).ln(), v.ln()))
        })
        .unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    (
        err < 0.02 && (slope - 0.5).abs() <= 0.02 && xs.len() == 10 && secs < 60.0,
        format!("amplitude at 1.05 {a:.5} vs {oracle:.5} ({err:.1e}), slope {slope:.4} over {} points, {secs:.1} s", xs.len()),
    )
}

fn c8_morse() -> Verdict {
    let fam = family(catalog::p2(1).unwrap(), sine(24));
    let hi = morse_inequality_audit(&fam, 2.5, None, CensusOptions::default()).unwrap();
    let lo = morse_inequality_audit(&fam, 0.5, None, CensusOptions::default()).unwrap();
    let trivial =
        lo.points.len() == 1 && lo.points[0].morse_index == 0 && lo.points[0].norm < 1e-10;
    (
        hi.euler == 1 && trivial,
        format!(
            "λ=2.5: N_q {:?}, Σ(−1)^i N_i = {}; λ=0.5: {} point(s), index {:?}",
            hi.counts,
            hi.euler,
            lo.points.len(),
            lo.points.iter().map(|p| p.morse_index).collect::<Vec<_>>()
        ),
    )
}

fn c9_marino_prodi() -> Verdict {
    let s = p2_setup(32);
    let rep = marino_prodi_audit(
        &s,
        &[1.0],
        PerturbOptions {
            seed: 9,
            ..PerturbOptions::default()
        },
    )
    .unwrap();
    let (lo, hi) = rep.bracket;
    let inside = rep.trials.iter().all(|t| {
        !t.points.is_empty()
            && t.points
                .iter()
                .all(|p| p.nullity == 0 && p.morse_index >= lo && p.morse_index <= hi)
    });
    (
        rep.trials.len() == 5 && inside && rep.exterior_max_difference == 0.0,
        format!(
            "{} trials, points per trial {:?}, bracket [{lo}, {hi}], exterior max |Δ| {:e}",
            rep.trials.len(),
            rep.trials
                .iter()
                .map(|t| t.points.len())
                .collect::<Vec<_>>(),
            rep.exterior_max_difference
        ),
    )
}

fn c10_orbits() -> Verdict {
    let disc = interval(0.0, 2.0 * PI, 1, BoundaryCondition::Periodic, 9);
    let fam = family(catalog::p1_periodic().unwrap(), disc);
    let (_, _, p) = pencil(&fam);
    let first = p.groups.iter().find(|g| g.lambda > 1.0 + 1e-6).unwrap();
    let at = fam.at(&[first.lambda]).unwrap();
    let mut critical = true;
    let sols: Vec<DVector<f64>> = (0..8)
        .map(|i| {
            let t = 0.7 * i as f64;
            let v = first.basis.column(0) * t.cos() + first.basis.column(1) * t.sin();
            let v = &v * (0.5 / fam.disc().norm(&v));
            critical &= fam.disc().dual_norm(&at.gradient(&v).unwrap()) < 1e-12;
            v
        })
        .collect();
    let orbits = orbit_group(&sols, fam.disc(), 1e-8).unwrap();
    let consts: Vec<DVector<f64>> = [0.4, -1.2]
        .iter()
        .map(|c| fam.disc().mode(0, 0, *c))
        .collect();
    let fixed = orbit_group(&consts, fam.disc(), 1e-8).unwrap();
    let all_fixed = fixed.fixed_points.iter().all(|f| *f);
    (
        critical && first.multiplicity == 2 && orbits.count == 1 && all_fixed,
        format!(
            "λ={:.4} multiplicity {}: {} solutions in {} orbit(s); constants fixed {all_fixed}",
            first.lambda,
            first.multiplicity,
            sols.len(),
            orbits.count
        ),
    )
}

fn c11_determinism() -> Verdict {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut same = true;
    let mut names = Vec::new();
    for name in ["p2_morse.json", "p2_reduce.json", "p1_spectrum.json"] {
        let outs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let status = Command::new(env!("CARGO_BIN_EXE_veldt"))
                    .args([
                        "--config",
                        configs.join(name).to_str().unwrap(),
                        "--out",
                        dir.path().to_str().unwrap(),
                        "--threads",
                        "1",
                    ])
                    .output()
                    .unwrap();
                assert_eq!(status.status.code(), Some(0));
                let mut bytes = std::fs::read(dir.path().join("report.json")).unwrap();
                bytes.extend(std::fs::read(dir.path().join("summary.txt")).unwrap());
                bytes
            })
            .collect();
        same &= outs[0] == outs[1];
        names.push(name);
    }
    (
        same,
        format!(
            "report.json and summary.txt byte-identical across two runs of {}",
            names.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("pencil spectrum", c1_pencil),
        ("derivative oracles", c2_derivatives),
        ("split contract", c3_split),
        ("index jump", c4_index_jump),
        ("reduction contract", c5_reduction),
        ("reduced normal form", c6_normal_form),
        ("pitchfork", c7_pitchfork),
        ("Morse identity", c8_morse),
        ("Marino–Prodi perturbation", c9_marino_prodi),
        ("orbit grouping", c10_orbits),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(v) => v,
            Err(e) => (
                false,
                format!(
                    "panicked: {:?}",
                    e.downcast_ref::<String>()
                        .map(String::as_str)
                        .or(e.downcast_ref::<&str>().copied())
                ),
            ),
        };
        println!(
            "{} [{:>2}] {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
        if !ok {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
