use cofkit::habit::habit_solutions;
use cofkit::lattice::{monoclinic_variants, MonoclinicParams};
use cofkit::linalg3::{rotation_axis_angle, Mat3, Vec3};
use cofkit::qchull::*;
use cofkit::startwin::{cc_parameters, TwinColumnAB};
use cofkit::twinning::{twin_solutions, twofold_axes, TwinKind};
use cofkit::{CofkitError, Tolerances};

/// Block with eigenvalues `1` and `lambda`, rotated by `theta`.
fn cc1_params(lambda: f64, d: f64, theta: f64) -> MonoclinicParams {
    let (c, s) = (theta.cos(), theta.sin());
    let a = c * c + lambda * s * s;
    let cc = s * s + lambda * c * c;
    let b = ((lambda - 1.0) * s * c).abs();
    MonoclinicParams::new(a, b, cc, d)
}

#[test]
fn compound_connections_are_pure_interfaces() {
    let tol = Tolerances::default();
    for (lambda, d, theta) in [(1.06, 0.94, 0.4), (0.93, 1.05, 1.1), (1.12, 0.9, 0.8)] {
        let p = cc1_params(lambda, d, theta);
        let vs = monoclinic_variants(&p).unwrap();
        for pair in [(1, 2), (1, 3), (1, 4)] {
            let sols = compound_identity_connections(&p, pair, &tol).unwrap();
            assert_eq!(sols.len(), 4);
            let det = vs.get(1).det();
            let mut habits = Vec::new();
            for k in [pair.0, pair.1] {
                habits.extend(habit_solutions(vs.get(k), &tol).unwrap().solutions);
            }
            for c in &sols {
                // |a| = |D - d^2| / d and n3^2 = d^2 (1 - d^2) / (D^2 - d^4) in the e3 frame.
                assert!((c.a.norm() - (det - d * d).abs() / d).abs() < 1e-10);
                let n3 = d * d * (1.0 - d * d) / (det * det - d.powi(4));
                assert!((c.n[2] * c.n[2] - n3).abs() < 1e-10);
                assert!(c.residual < 1e-10);
                assert!(habits.iter().any(|h| (h.a.outer(&h.n) - c.a.outer(&c.n)).norm() < 1e-9));
                let f = c.gradient();
                assert!(two_well_membership(&f, vs.get(pair.0), vs.get(pair.1), &tol).unwrap());
            }
        }
    }
}

#[test]
fn compound_errors() {
    let tol = Tolerances::default();
    assert_eq!(
        compound_identity_connections(&cc1_params(1.06, 1.0, 0.4), (1, 4), &tol).unwrap_err(),
        CofkitError::DegenerateD
    );
    let p = MonoclinicParams::new(1.02, 0.0, 1.02, 0.95);
    assert_eq!(compound_identity_connections(&p, (1, 3), &tol).unwrap_err(), CofkitError::IdenticalVariants);
    let zn = MonoclinicParams::new(1.0015, 0.0073, 1.0591, 0.9363);
    assert!(matches!(compound_identity_connections(&zn, (1, 2), &tol), Err(CofkitError::Cc1Violated { .. })));
    assert!(matches!(
        compound_identity_connections(&cc1_params(1.06, 0.94, 0.4), (1, 5), &tol),
        Err(CofkitError::HypothesisViolated(_))
    ));
}

#[test]
fn membership_cases() {
    let tol = Tolerances::default();
    let p = MonoclinicParams::new(1.03, 0.021, 0.97, 0.95);
    let vs = monoclinic_variants(&p).unwrap();
    let (a, b) = (*vs.get(1), *vs.get(4));
    let axes = twofold_axes(&a, &b, &tol).unwrap();
    let (t1, t2) = twin_solutions(&a, &axes[0]).unwrap();
    for t in [t1, t2] {
        let mid = a + t.b.outer(&t.m) * 0.5;
        assert!(two_well_membership(&mid, &a, &b, &tol).unwrap());
        assert!(two_well_membership_sampled(&mid, &a, &b, 10_000, &tol).unwrap());
        let q = rotation_axis_angle(Vec3::new(0.3, -1.0, 0.2), 0.7).unwrap();
        assert!(two_well_membership(&(q * mid), &a, &b, &tol).unwrap());
    }
    assert!(!two_well_membership(&(a * 1.1), &a, &b, &tol).unwrap());
    // Stretching along the plane beyond both wells breaks the pointwise bound.
    let over = a * Mat3::diag(1.02, 1.0 / 1.02, 1.0);
    let an = two_well_membership(&over, &a, &b, &tol).unwrap();
    let sm = two_well_membership_sampled(&over, &a, &b, 10_000, &tol).unwrap();
    assert_eq!(an, sm);
    assert!(!an);
    assert_eq!(
        two_well_membership(&a, &a, &(b * 1.01), &tol).unwrap_err(),
        CofkitError::WellsIncompatible
    );
}

#[test]
fn analytic_membership_matches_sampling() {
    let tol = Tolerances::default();
    let p = MonoclinicParams::new(1.03, 0.021, 0.97, 0.95);
    let vs = monoclinic_variants(&p).unwrap();
    let (a, b) = (*vs.get(1), *vs.get(2));
    // In-plane stretches of A with the determinant and e3 behaviour preserved.
    for k in 0..40 {
        let t = 0.05 * f64::from(k);
        let s = 1.0 + 0.004 * (f64::from(k) * 0.37).sin();
        let r = rotation_axis_angle(Vec3::unit(2), t).unwrap();
        let f = a * r * Mat3::diag(s, 1.0 / s, 1.0) * r.transpose();
        assert_eq!(
            two_well_membership(&f, &a, &b, &tol).unwrap(),
            two_well_membership_sampled(&f, &a, &b, 10_000, &tol).unwrap(),
            "k = {k}"
        );
    }
}

#[test]
fn type_ii_family() {
    let tol = Tolerances::default();
    let p = cc_parameters(TwinKind::TypeII, TwinColumnAB::A, 1.07, 0.95).unwrap();
    let vs = monoclinic_variants(&p).unwrap();
    let (u, v) = (*vs.get(1), *vs.get(11));
    let axes = twofold_axes(&u, &v, &tol).unwrap();
    let (_, t2) = twin_solutions(&u, &axes[0]).unwrap();
    let grid: Vec<f64> = (0..11).map(|i| f64::from(i) / 10.0).collect();
    let fam = type_i_ii_identity_family(&u, &t2, &grid, &tol).unwrap();
    assert_eq!(fam.connections.len(), 22);
    assert_eq!(fam.merged, 0);
    assert!(fam.connections.iter().all(|c| c.residual <= 1e-10));
    let pure = habit_solutions(&u, &tol).unwrap().solutions;
    for c in fam.connections.iter().filter(|c| c.mu == Some(0.0)) {
        assert!(pure.iter().any(|h| (h.a.outer(&h.n) - c.a.outer(&c.n)).norm() < 1e-10));
    }
    for &mu in &grid {
        let f = u + t2.b.outer(&t2.m) * mu;
        assert!(two_well_membership(&f, &u, &v, &tol).unwrap(), "mu = {mu}");
    }
    let s = &fam.scan;
    println!("kfit {} kpred {} fit {} spread {} ratio {}", s.kappa_fit, s.kappa_predicted, s.fit_residual, s.beta_spread, s.min_ratio);
    assert_eq!(s.points.len(), 201 * 201);
    assert!((s.kappa_fit - s.kappa_predicted).abs() <= 1e-6 * s.kappa_predicted.abs());
    assert!(s.fit_residual < 1e-6 && s.beta_spread < 1e-6);
    assert!(s.min_ratio > 0.99);
    assert!(s.to_csv().starts_with("beta,gamma,f1,phi\n"));
}

#[test]
fn family_hypotheses() {
    let tol = Tolerances::default();
    let p = MonoclinicParams::new(1.0015, 0.0073, 1.0591, 0.9363);
    let vs = monoclinic_variants(&p).unwrap();
    let (u, v) = (*vs.get(1), *vs.get(5));
    let axes = twofold_axes(&u, &v, &tol).unwrap();
    let (_, t2) = twin_solutions(&u, &axes[0]).unwrap();
    assert!(matches!(
        type_i_ii_identity_family(&u, &t2, &[0.5], &tol),
        Err(CofkitError::HypothesisViolated(_))
    ));
}

#[test]
fn type_i_family() {
    let tol = Tolerances::default();
    let p = cc_parameters(TwinKind::TypeI, TwinColumnAB::A, 1.05, 0.96).unwrap();
    let vs = monoclinic_variants(&p).unwrap();
    let (u, v) = (*vs.get(1), *vs.get(11));
    let axes = twofold_axes(&u, &v, &tol).unwrap();
    let (t1, _) = twin_solutions(&u, &axes[0]).unwrap();
    let grid: Vec<f64> = (0..11).map(|i| f64::from(i) / 10.0).collect();
    let fam = type_i_ii_identity_family(&u, &t1, &grid, &tol).unwrap();
    assert_eq!(fam.connections.len(), 22);
    assert!(fam.connections.iter().all(|c| c.residual <= 1e-10));
    assert!((fam.scan.kappa_fit - fam.scan.kappa_predicted).abs() <= 1e-6 * fam.scan.kappa_predicted.abs());
    for &mu in &grid {
        assert!(two_well_membership(&(u + t1.b.outer(&t1.m) * mu), &u, &v, &tol).unwrap());
    }
}
