use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use veldt::galerkin::{build_space, BoundaryCondition, Domain, SpaceSpec};
use veldt::lagrangian::{catalog, Lagrangian};
use veldt::reduction::{
    find_critical_point, lipschitz_audit, marino_prodi_audit, marino_prodi_perturb,
    reduced_hessian_at_origin, uniqueness_probe, write_reduced_csv, Functional, NewtonOptions,
    ParamFunctional, PerturbOptions, ReductionSetup, SetupOptions, PSI_TOL,
};

fn setup(f: Lagrangian, k: usize) -> ReductionSetup {
    let disc = build_space(&SpaceSpec::new(
        Domain::interval(0.0, PI),
        1,
        BoundaryCondition::Dirichlet,
        k,
    ))
    .unwrap();
    let u0 = disc.zero();
    let fam = ParamFunctional::new(f, vec![catalog::mass(1, 1, 1).unwrap()], disc).unwrap();
    ReductionSetup::new(fam, u0, &[1.0], SetupOptions::default()).unwrap()
}

/// Kernel coordinate of `a·sin x`; the kernel vector is `sin x / ‖sin x‖_{1,2}` with `‖sin x‖² = π`.
fn z_of(a: f64) -> DVector<f64> {
    DVector::from_element(1, a * PI.sqrt())
}

#[test]
fn setup_finds_the_sine_kernel() {
    let s = setup(catalog::p2(1).unwrap(), 32);
    assert_eq!(s.kernel_dim(), 1);
    assert_eq!(s.morse_index(), 0);
    assert!((s.kernel()[(0, 0)] - 1.0 / PI.sqrt()).abs() < 1e-12);
    assert!((s.trust_radius() - 0.9).abs() < 1e-6);
    let p = s.complement_projector();
    let gram = s.family().disc().gram();
    assert!((&p * &p - &p).abs().max() < 1e-12);
    let e = s.kernel();
    assert!(((e.transpose() * gram * e)[(0, 0)] - 1.0).abs() < 1e-12);
}

#[test]
fn psi_vanishes_at_the_origin() {
    for f in [catalog::p1(1), catalog::p2(1), catalog::p3(1)] {
        let s = setup(f.unwrap(), 16);
        for lam in [0.6, 0.9, 1.0, 1.1, 1.4] {
            let psi = s.solve_psi(&[lam], &z_of(0.0), PSI_TOL, None).unwrap();
            assert!(psi.w.iter().all(|v| *v == 0.0));
            assert_eq!(psi.iterations, 0);
            assert!(s
                .reduced_gradient(&[lam], &z_of(0.0))
                .unwrap()
                .iter()
                .all(|v| *v == 0.0));
        }
    }
}

#[test]
fn linear_problem_has_trivial_complement_correction() {
    let s = setup(catalog::p1(1).unwrap(), 16);
    for a in [0.05, 0.1, 0.2] {
        let psi = s.solve_psi(&[1.3], &z_of(a), PSI_TOL, None).unwrap();
        assert!(psi.w.norm() < 1e-13);
    }
    let audit = lipschitz_audit(&s, &[1.2], 10, 0.2, 4).unwrap();
    assert!(audit.max_ratio < 1e-10);
}

#[test]
fn quartic_complement_correction_is_cubic() {
    let s = setup(catalog::p2(1).unwrap(), 64);
    let disc = s.family().disc();
    let mut norms = Vec::new();
    for a in [0.1, 0.2] {
        let psi = s.solve_psi(&[1.05], &z_of(a), PSI_TOL, None).unwrap();
        assert!(psi.residual < 1e-11);
        assert!(disc.inner(&psi.w, &disc.mode(0, 0, 1.0)).abs() < 1e-14);
        norms.push(disc.norm(&psi.w));
    }
    let slope = (norms[1] / norms[0]).ln() / 2f64.ln();
    assert!((slope - 3.0).abs() < 0.05, "{slope}");
}

#[test]
fn residual_contract_on_grid() {
    let s = setup(catalog::p2(1).unwrap(), 64);
    let zs: Vec<DVector<f64>> = (0..21).map(|i| z_of(-0.3 + 0.03 * i as f64)).collect();
    for lam in [0.9, 0.95, 1.0, 1.05, 1.1] {
        let samples = s.continuation(&[lam], &zs).unwrap();
        for (smp, z) in samples.iter().zip(&zs) {
            let u = s.kernel_field(z);
            let scale = 1.0
                + s.family()
                    .disc()
                    .dual_norm(&s.family().gradient(&[lam], &u).unwrap());
            assert!(smp.residual < 1e-11 * scale);
        }
    }
}

#[test]
fn reduced_normal_form_coefficients() {
    let s = setup(catalog::p2(1).unwrap(), 64);
    let lam = 1.05;
    let amps: Vec<f64> = (1..=30).map(|i| 0.01 * i as f64).collect();
    let zs: Vec<DVector<f64>> = amps.iter().map(|a| z_of(*a)).collect();
    let samples = s.continuation(&[lam], &zs).unwrap();
    // Least squares on [a², a⁴].
    let x = nalgebra::DMatrix::from_fn(amps.len(), 2, |i, j| amps[i].powi(2 * (j as i32 + 1)));
    let y = DVector::from_iterator(amps.len(), samples.iter().map(|s| s.value));
    let coef = (x.transpose() * &x)
        .lu()
        .solve(&(x.transpose() * y))
        .unwrap();
    let quad = PI / 4.0 * (1.0 - lam);
    let quart = 3.0 * PI / 32.0;
    assert!((coef[0] - quad).abs() < 0.01 * quad.abs(), "{}", coef[0]);
    assert!((coef[1] - quart).abs() < 0.01 * quart, "{}", coef[1]);
}

#[test]
fn reduced_gradient_matches_finite_differences() {
    let s = setup(catalog::p2(1).unwrap(), 32);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 1e-4;
    for _ in 0..50 {
        let lam = rng.gen_range(0.7..1.3);
        let z = DVector::from_element(1, rng.gen_range(-0.5..0.5));
        let e = DVector::from_element(1, h);
        let fd = (s.reduced_value(&[lam], &(&z + &e)).unwrap()
            - s.reduced_value(&[lam], &(&z - &e)).unwrap())
            / (2.0 * h);
        let g = s.reduced_gradient(&[lam], &z).unwrap()[0];
        let scale = g.abs().max(1e-3);
        assert!(
            (fd - g).abs() < 1e-5 * scale,
            "λ = {lam}, z = {}: {fd} vs {g}",
            z[0]
        );
    }
}

#[test]
fn lipschitz_and_uniqueness_audits() {
    let s = setup(catalog::p2(1).unwrap(), 32);
    let a = lipschitz_audit(&s, &[1.05], 20, 0.2, 1).unwrap();
    assert!(a.passed && a.max_ratio < 0.5, "{}", a.max_ratio);
    let u = uniqueness_probe(&s, &[1.05], &z_of(0.2), 10, 2).unwrap();
    assert!(u.passed, "{u:?}");

    let p3 = setup(catalog::p3(1).unwrap(), 32);
    let a = lipschitz_audit(&p3, &[1.02], 20, 0.1, 3).unwrap();
    assert!(a.passed, "{}", a.max_ratio);
}

#[test]
fn reduced_hessian_closed_form() {
    let s = setup(catalog::p2(1).unwrap(), 64);
    let at = reduced_hessian_at_origin(&s, &[1.0]).unwrap();
    assert!(at.closed_form.iter().all(|v| *v == 0.0));
    assert!(at.finite_difference.abs().max() < 1e-8);
    let up = reduced_hessian_at_origin(&s, &[1.05]).unwrap();
    // In the sin x coordinate: −0.05·∫sin² = −0.05·π/2.
    assert!((up.closed_form[(0, 0)] * PI + 0.05 * PI / 2.0).abs() < 1e-12);
    assert!(up.relative_error < 1e-6, "{}", up.relative_error);
    let down = reduced_hessian_at_origin(&s, &[0.95]).unwrap();
    assert!((down.closed_form[(0, 0)] + up.closed_form[(0, 0)]).abs() < 1e-15);
}

#[test]
fn perturbation_vanishes_for_zero_vector_and_matches_derivatives() {
    let s = setup(catalog::p2(1).unwrap(), 16);
    let fam = s.family();
    let base = fam.at(&[1.0]).unwrap();
    let disc = fam.disc();
    let zero = marino_prodi_perturb(
        &base,
        s.base_point(),
        s.kernel(),
        0.6,
        0.3,
        &DVector::zeros(1),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let u = disc.random_field(&mut rng, 0.4);
        assert_eq!(zero.value(&u).unwrap(), base.value(&u).unwrap());
        assert_eq!(zero.gradient(&u).unwrap(), base.gradient(&u).unwrap());
    }
    // Large b so the correction dominates round-off in the oracle.
    let pert = marino_prodi_perturb(
        &base,
        s.base_point(),
        s.kernel(),
        0.6,
        0.3,
        &DVector::from_element(1, 0.7),
    )
    .unwrap();
    for radius in [0.1, 0.2, 0.35, 0.5] {
        let u = disc.random_field(&mut rng, radius) + s.kernel().column(0) * (0.8 * radius);
        let g = pert.gradient(&u).unwrap();
        let h = pert.hessian(&u).unwrap();
        let step = 1e-6;
        for k in 0..disc.dim() {
            let e = disc.mode(0, k, step);
            let fd =
                (pert.value(&(&u + &e)).unwrap() - pert.value(&(&u - &e)).unwrap()) / (2.0 * step);
            assert!(
                (fd - g[k]).abs() < 1e-7 * (1.0 + g[k].abs()),
                "gradient {k}"
            );
            let fdh = (pert.gradient(&(&u + &e)).unwrap() - pert.gradient(&(&u - &e)).unwrap())
                / (2.0 * step);
            assert!(
                (fdh - h.column(k)).amax() < 1e-6 * (1.0 + h.amax()),
                "hessian {k} at r = {radius}"
            );
        }
    }
}

#[test]
fn marino_prodi_census_at_degenerate_origin() {
    let s = setup(catalog::p2(1).unwrap(), 32);
    let rep = marino_prodi_audit(
        &s,
        &[1.0],
        PerturbOptions {
            seed: 11,
            ..PerturbOptions::default()
        },
    )
    .unwrap();
    assert_eq!(rep.bracket, (0, 1));
    assert_eq!(rep.trials.len(), 5);
    assert_eq!(rep.exterior_max_difference, 0.0);
    for t in &rep.trials {
        assert!(t.b_norm < t.b_bound);
        assert!(!t.points.is_empty());
        assert!(t
            .points
            .iter()
            .all(|p| p.nullity == 0 && p.morse_index <= 1));
    }
    assert!(rep.passed);
}

#[test]
fn unperturbed_origin_is_the_only_nearby_critical_point_below_the_eigenvalue() {
    let s = setup(catalog::p2(1).unwrap(), 16);
    let f = s.family().at(&[0.9]).unwrap();
    let start = s.family().disc().mode(0, 0, 0.2);
    let out = find_critical_point(&f, &start, NewtonOptions::default()).unwrap();
    assert!(s.family().disc().norm(&out.u) < 1e-8);
}

#[test]
fn reduced_samples_export() {
    let s = setup(catalog::p2(1).unwrap(), 8);
    let samples = s.continuation(&[1.05], &[z_of(0.0), z_of(0.1)]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reduced.csv");
    write_reduced_csv(&path, &samples).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("lambda_1,z_1,value,gradient_norm,residual"));
    assert_eq!(text.lines().count(), 3);
}
