use cofkit::lattice::{monoclinic_variants, MonoclinicParams};
use cofkit::startwin::*;
use cofkit::twinning::TwinKind;
use cofkit::{CofkitError, Tolerances};

fn zn() -> MonoclinicParams {
    MonoclinicParams::new(1.0015, 0.0073, 1.0591, 0.9363)
}

#[test]
fn star_on_full_branch() {
    let tol = Tolerances::default();
    for (branch, d) in [(Branch::S2c, 0.93), (Branch::S1c, 0.9), (Branch::S2a, 1.1), (Branch::S1a, 1.2)] {
        let lambda = branch.lambda(d).unwrap();
        let p = cc_parameters(branch.kind(), TwinColumnAB::A, lambda, d).unwrap();
        let r = star_classify(&p, TwinColumnAB::A.pair(), branch.kind(), false, &tol).unwrap();
        println!("{branch:?} {:?} mu={:?} cands={:?} w={}", r.classification, r.mu_star, r.mu_candidates, r.witnesses.len());
        assert_eq!(r.classification, StarClass::Star, "{branch:?}");
        assert_eq!(r.witnesses.len(), 3);
        let expect = [lambda / (lambda + d), d / (lambda + d)];
        assert!(r.mu_candidates.iter().all(|m| expect.iter().any(|e| (m - e).abs() < 1e-8)));
        let fan = star_laminates(&r, false, &tol).unwrap();
        assert!(fan.min_stack_sigma > 1e-6);
    }
}

#[test]
fn half_star_on_half_branch() {
    let tol = Tolerances::default();
    for (branch, d) in [(Branch::H2c, 0.93), (Branch::H1c, 0.9), (Branch::H2a, 1.1), (Branch::H1a, 1.2)] {
        let lambda = branch.lambda(d).unwrap();
        let p = cc_parameters(branch.kind(), TwinColumnAB::A, lambda, d).unwrap();
        let r = star_classify(&p, TwinColumnAB::A.pair(), branch.kind(), false, &tol).unwrap();
        println!("{branch:?} {:?} mu={:?} w={}", r.classification, r.mu_star, r.witnesses.len());
        assert_eq!(r.classification, StarClass::HalfStar, "{branch:?}");
        assert!((r.mu_star.unwrap() - 0.5).abs() < 1e-8);
        star_laminates(&r, false, &tol).unwrap();
    }
}

#[test]
fn generic_cc_is_not_star() {
    let tol = Tolerances::default();
    let p = cc_parameters(TwinKind::TypeII, TwinColumnAB::A, 1.07, 0.95).unwrap();
    let r = star_classify(&p, TwinColumnAB::A.pair(), TwinKind::TypeII, false, &tol).unwrap();
    assert_eq!(r.classification, StarClass::None);
    assert_eq!(star_laminates(&r, false, &tol).unwrap_err(), CofkitError::NotAStarTwin);
    let r = star_classify(&p, TwinColumnAB::A.pair(), TwinKind::TypeII, true, &tol).unwrap();
    assert!(matches!(star_laminates(&r, true, &tol), Err(CofkitError::RankOneViolation { .. })));
}

#[test]
fn zn_gate_and_force() {
    let tol = Tolerances::default();
    let err = star_classify(&zn(), (1, 5), TwinKind::TypeII, false, &tol).unwrap_err();
    assert!(matches!(err, CofkitError::NotACofactorTwin { .. }));
    let r = star_classify(&zn(), (1, 5), TwinKind::TypeII, true, &tol).unwrap();
    println!("{:?} ds={:?} dh={:?}", r.classification, r.distance_to_star, r.distance_to_half_star);
    assert_eq!(r.classification, StarClass::None);
    assert!((r.distance_to_star.unwrap() - 9.0e-4).abs() < 1e-4);
}

#[test]
fn orbit_invariance() {
    let tol = Tolerances::default();
    let d = 0.93;
    let lambda = Branch::S2c.lambda(d).unwrap();
    let p = cc_parameters(TwinKind::TypeII, TwinColumnAB::A, lambda, d).unwrap();
    let vs = monoclinic_variants(&p).unwrap();
    let base = star_classify(&p, (1, 11), TwinKind::TypeII, false, &tol).unwrap();
    for q in cofkit::lattice::cubic_symmetry_group() {
        let perm = vs.permutation(&q).unwrap();
        let pair = (perm[0], perm[10]);
        let r = star_classify(&p, pair, TwinKind::TypeII, false, &tol).unwrap();
        assert_eq!(r.classification, base.classification);
        let mut a = r.mu_candidates.clone();
        a.sort_by(f64::total_cmp);
        assert!(a.iter().zip(&base.mu_candidates).all(|(x, y)| (x - y).abs() < 1e-8), "{pair:?} {a:?}");
    }
}

#[test]
fn zn_projection() {
    let u = zn().u1();
    let p = project_to_manifold(&u, ManifoldTarget::StarTypeII, 7).unwrap();
    assert_eq!(p.column, TwinColumnAB::B);
    let target = [1.0010, 0.0078, 1.0594, 0.9368];
    let got = [p.params.a, p.params.b, p.params.c, p.params.d];
    assert!(got.iter().zip(target).all(|(g, t)| (g - t).abs() < 1e-4), "{got:?}");
    assert!((p.distance - 1.07e-3).abs() < 1e-4);
    assert!(p.constraint_residual <= 1e-12);
    let c = project_to_manifold(&u, ManifoldTarget::CcTypeII, 7).unwrap();
    assert!((c.distance - 0.9e-3).abs() < 1e-4);
    let again = project_to_manifold(&p.matrix, ManifoldTarget::StarTypeII, 7).unwrap();
    assert!(again.distance < 1e-12);
    let same = project_to_manifold(&u, ManifoldTarget::StarTypeII, 7).unwrap();
    assert_eq!(same, p);
}

#[test]
fn curve_domains() {
    let grid: Vec<f64> = (0..8).map(|i| 0.92 + 0.01 * f64::from(i)).collect();
    let rows = star_parameter_curves(TwinKind::TypeII, StarVariant::Full, &grid).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.branch == "S2c" && r.residual.abs() <= 1e-10));
    assert!(matches!(
        star_parameter_curves(TwinKind::TypeII, StarVariant::Full, &[1.0]),
        Err(CofkitError::DomainViolation { .. })
    ));
    assert!(star_parameter_curves(TwinKind::TypeI, StarVariant::Half, &[]).unwrap().is_empty());
    for r in half_star_d_one_curve(&[1.02, 1.05, 1.1]).unwrap() {
        assert!(r.residual.abs() < 1e-13);
    }
}
