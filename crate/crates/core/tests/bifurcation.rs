use nalgebra::DVector;
use std::f64::consts::PI;
use std::time::Instant;
use veldt::bifurcation::{
    classify_reduced_origin, detect_branches, morse_inequality_audit, orbit_group, Alternative,
    BranchOptions, CensusOptions, ConditionClass, OriginClass,
};
use veldt::galerkin::{build_space, BoundaryCondition, Discretization, Domain, SpaceSpec};
use veldt::lagrangian::{catalog, Lagrangian};
use veldt::reduction::{Functional, ParamFunctional, ReductionSetup, SetupOptions};
use veldt::spectral::pencil_eigs;
use veldt::VeldtError;

fn family(f: Lagrangian, k: usize) -> ParamFunctional {
    let disc = build_space(&SpaceSpec::new(
        Domain::interval(0.0, PI),
        1,
        BoundaryCondition::Dirichlet,
        k,
    ))
    .unwrap();
    ParamFunctional::new(f, vec![catalog::mass(1, 1, 1).unwrap()], disc).unwrap()
}

fn pitchfork_options(window: (f64, f64), grid: usize) -> BranchOptions {
    BranchOptions {
        window,
        grid,
        ..BranchOptions::default()
    }
}

/// Amplitude of the sine coefficient on the `λ > 1` branch of `½u′² + ¼u⁴ − λ½u²`.
fn amplitude_oracle(lam: f64) -> f64 {
    2.0 * ((lam - 1.0) / 3.0).sqrt()
}

#[test]
fn pitchfork_amplitude_and_exponent() {
    let fam = family(catalog::p2(1).unwrap(), 64);
    let u0 = fam.disc().zero();
    let start = Instant::now();
    let rep = detect_branches(&fam, &u0, pitchfork_options((0.8, 1.3), 51)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "{elapsed} s");
    assert_eq!(rep.candidates.len(), 1);
    let c = &rep.candidates[0];
    assert!((c.lambda_star - 1.0).abs() < 1e-6);
    assert_eq!(c.alternative, Alternative::Iv);
    assert!(c.observed.contains(&Alternative::Iv));
    assert!(!c.observed.contains(&Alternative::I));
    assert_eq!(c.condition, ConditionClass::A);
    assert!(c.necessary.passed);
    // Branches exist only for λ > 1 and come in ± pairs.
    assert!(c
        .counts
        .iter()
        .all(|(l, n)| if *l < 1.0 - 1e-9 { *n == 0 } else { true }));
    let pts: Vec<_> = c.branches.iter().flat_map(|b| b.points.iter()).collect();
    let at = |lam: f64| -> Vec<f64> {
        pts.iter()
            .filter(|p| (p.lambda - lam).abs() < 1e-9)
            .map(|p| p.sup_amplitude)
            .collect()
    };
    let a = at(1.05);
    assert_eq!(a.len(), 2);
    for v in a {
        assert!((v - 0.2582).abs() < 0.02 * 0.2582, "{v}");
    }
    let lams: Vec<f64> = (0..=9).map(|i| 1.01 + 0.01 * i as f64).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in &lams {
        if let Some(v) = at(*l).first() {
            xs.push((l - 1.0).ln());
            ys.push(v.ln());
        }
    }
    assert!(xs.len() >= 8);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 0.5).abs() < 0.02, "{slope}");
    for p in &pts {
        assert_eq!(p.nullity, 0);
        assert_eq!(p.morse_index, 0);
        assert!(p.residual < 1e-10);
    }
}

#[test]
fn pitchfork_branches_are_symmetric() {
    let fam = family(catalog::p2(1).unwrap(), 32);
    let u0 = fam.disc().zero();
    let rep = detect_branches(&fam, &u0, pitchfork_options((0.9, 1.2), 13)).unwrap();
    let c = &rep.candidates[0];
    let pos: Vec<_> = c
        .branches
        .iter()
        .filter(|b| b.points[0].z[0] > 0.0)
        .collect();
    let neg: Vec<_> = c
        .branches
        .iter()
        .filter(|b| b.points[0].z[0] < 0.0)
        .collect();
    assert_eq!(pos.len(), neg.len());
    for (p, q) in pos.iter().zip(&neg) {
        for (a, b) in p.points.iter().zip(&q.points) {
            assert_eq!(a.lambda, b.lambda);
            assert!(
                (a.reduced_value - b.reduced_value).abs() < 1e-10 * (1.0 + a.reduced_value.abs())
            );
            assert!((&a.u + &b.u).amax() < 1e-8);
            assert!(
                (a.sup_amplitude - amplitude_oracle(a.lambda)).abs()
                    < 0.05 * amplitude_oracle(a.lambda)
            );
        }
    }
}

#[test]
fn amplitude_is_stable_under_refinement() {
    let amp = |k: usize| {
        let fam = family(catalog::p2(1).unwrap(), k);
        let u0 = fam.disc().zero();
        let rep = detect_branches(&fam, &u0, pitchfork_options((0.95, 1.05), 3)).unwrap();
        rep.candidates[0]
            .branches
            .iter()
            .flat_map(|b| b.points.iter())
            .find(|p| (p.lambda - 1.05).abs() < 1e-9 && p.z[0] > 0.0)
            .unwrap()
            .sup_amplitude
    };
    let (a, b) = (amp(16), amp(32));
    assert!((a - b).abs() < 1e-3 * b, "{a} {b}");
}

#[test]
fn linear_problem_has_a_continuum_at_the_eigenvalue() {
    let fam = family(catalog::p1(1).unwrap(), 16);
    let u0 = fam.disc().zero();
    let rep = detect_branches(&fam, &u0, pitchfork_options((0.5, 1.5), 11)).unwrap();
    let c = &rep.candidates[0];
    assert_eq!(c.alternative, Alternative::I);
    assert_eq!(c.observed, vec![Alternative::I]);
    assert!(c
        .counts
        .iter()
        .all(|(l, n)| (*l - 1.0).abs() < 1e-9 || *n == 0));
}

#[test]
fn index_jumps_match_multiplicities() {
    let fam = family(catalog::p1(1).unwrap(), 32);
    let u0 = fam.disc().zero();
    let rep = detect_branches(&fam, &u0, pitchfork_options((0.5, 10.0), 3)).unwrap();
    let stars: Vec<f64> = rep.candidates.iter().map(|c| c.lambda_star).collect();
    assert_eq!(stars.len(), 3);
    for (c, k) in rep.candidates.iter().zip([1.0, 2.0, 3.0]) {
        assert!((c.lambda_star - k * k).abs() < 1e-6 * k * k);
        let j = c.index_jump.jump.as_ref().unwrap();
        assert!(c.index_jump.consistent);
        assert_eq!(j.mu_plus as i64 - j.mu_minus as i64, j.nu as i64);
        assert_eq!(j.nu, 1);
    }
}

#[test]
fn reduced_origin_changes_from_minimum_to_maximum() {
    let fam = family(catalog::p2(1).unwrap(), 32);
    let u0 = fam.disc().zero();
    let setup = ReductionSetup::new(fam, u0, &[1.0], SetupOptions::default()).unwrap();
    let below = classify_reduced_origin(&setup, 0.95, 0).unwrap();
    assert_eq!(below.class, OriginClass::LocalMin);
    assert_eq!(below.hessian_class, Some(OriginClass::LocalMin));
    let above = classify_reduced_origin(&setup, 1.05, 0).unwrap();
    assert_eq!(above.class, OriginClass::LocalMax);
    assert_eq!(above.hessian_class, Some(OriginClass::LocalMax));
    // Degenerate at λ*: quartic term makes the origin a strict minimum.
    let at = classify_reduced_origin(&setup, 1.0, 0).unwrap();
    assert_eq!(at.class, OriginClass::LocalMin);
    assert_eq!(at.hessian_class, None);
}

#[test]
fn origin_of_a_linear_problem_is_not_isolated() {
    let fam = family(catalog::p1(1).unwrap(), 16);
    let u0 = fam.disc().zero();
    let setup = ReductionSetup::new(fam, u0, &[1.0], SetupOptions::default()).unwrap();
    assert!(matches!(
        classify_reduced_origin(&setup, 1.0, 0),
        Err(VeldtError::NotIsolated { .. })
    ));
}

#[test]
fn morse_census_counts() {
    let fam = family(catalog::p2(1).unwrap(), 16);
    let a = morse_inequality_audit(&fam, 0.5, None, CensusOptions::default()).unwrap();
    assert_eq!(a.points.len(), 1);
    assert_eq!(a.points[0].morse_index, 0);
    assert!(a.points[0].norm < 1e-10);
    assert!(a.passed);

    let a = morse_inequality_audit(&fam, 2.5, None, CensusOptions::default()).unwrap();
    assert_eq!(a.counts, vec![2, 1]);
    assert_eq!(a.euler, 1);
    assert!(a.passed, "{a:?}");
    // ±a sin x with a = 2√((λ−1)/3).
    let amp = 2.0 * (1.5f64 / 3.0).sqrt();
    for p in a.points.iter().filter(|p| p.morse_index == 0) {
        let sup = fam.disc().sup_norm(&p.u, 401);
        assert!((sup - amp).abs() < 0.05 * amp, "{sup}");
    }

    let a = morse_inequality_audit(&fam, 5.0, None, CensusOptions::default()).unwrap();
    assert_eq!(a.counts, vec![2, 2, 1]);
    assert_eq!(a.euler, 1);
    assert!(a.partial_sums.iter().all(|p| p.holds));
}

#[test]
fn morse_audit_aborts_on_degenerate_points() {
    let fam = family(catalog::p2(1).unwrap(), 8);
    assert!(matches!(
        morse_inequality_audit(&fam, 1.0, None, CensusOptions::default()),
        Err(VeldtError::AuditAborted { .. })
    ));
}

fn periodic(k: usize) -> Discretization {
    build_space(&SpaceSpec::new(
        Domain::interval(0.0, 2.0 * PI),
        1,
        BoundaryCondition::Periodic,
        k,
    ))
    .unwrap()
}

#[test]
fn periodic_first_eigenspace_is_one_orbit() {
    let disc = periodic(9);
    let fam = ParamFunctional::new(
        catalog::p1_periodic().unwrap(),
        vec![catalog::mass(1, 1, 1).unwrap()],
        disc,
    )
    .unwrap();
    let u0 = fam.disc().zero();
    let f = fam.f_hessian(&u0).unwrap();
    let g = fam.g_hessians(&u0).unwrap().remove(0);
    let p = pencil_eigs(&f, &g, fam.disc().gram()).unwrap();
    assert!((p.groups[0].lambda - 1.0).abs() < 1e-10);
    assert_eq!(p.groups[0].multiplicity, 1);
    let first = &p.groups[1];
    assert!((first.lambda - 2.0).abs() < 1e-10);
    assert_eq!(first.multiplicity, 2);
    let at = fam.at(&[first.lambda]).unwrap();
    let sols: Vec<DVector<f64>> = (0..7)
        .map(|i| {
            let t = 0.9 * i as f64;
            let v = first.basis.column(0) * t.cos() + first.basis.column(1) * t.sin();
            let v = &v * (0.7 / fam.disc().norm(&v));
            assert!(fam.disc().dual_norm(&at.gradient(&v).unwrap()) < 1e-12);
            v
        })
        .collect();
    let rep = orbit_group(&sols, fam.disc(), 1e-8).unwrap();
    assert_eq!(rep.count, 1);
    assert!(rep.fixed_points.iter().all(|f| !f));

    let consts: Vec<DVector<f64>> = [0.3, -1.0]
        .iter()
        .map(|c| fam.disc().mode(0, 0, *c))
        .collect();
    for c in &consts {
        assert!(
            fam.disc()
                .dual_norm(&fam.at(&[1.0]).unwrap().gradient(c).unwrap())
                < 1e-12
        );
    }
    let rep = orbit_group(&consts, fam.disc(), 1e-8).unwrap();
    assert!(rep.fixed_points.iter().all(|f| *f));
}
