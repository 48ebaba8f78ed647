use cofkit::cofactor::supercompat_metric;
use cofkit::lattice::{cubic_symmetry_group, monoclinic_variants, pair_orbit, MonoclinicParams};
use cofkit::linalg3::{eig_sym3, rotation_axis_angle, Mat3, Vec3};
use cofkit::twinning::{classify_pair, pair_twins};
use cofkit::Tolerances;
use proptest::prelude::*;

fn sym() -> impl Strategy<Value = Mat3> {
    prop::array::uniform6(-2.0f64..2.0).prop_map(|x| {
        Mat3::new([[x[0], x[3], x[4]], [x[3], x[1], x[5]], [x[4], x[5], x[2]]])
    })
}

fn general() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-2.0f64..2.0).prop_map(|x| {
        Mat3::new([[x[0], x[1], x[2]], [x[3], x[4], x[5]], [x[6], x[7], x[8]]])
    })
}

fn rotation() -> impl Strategy<Value = Mat3> {
    (prop::array::uniform3(-1.0f64..1.0), 0.0f64..std::f64::consts::PI)
        .prop_filter("axis", |(v, _)| Vec3(*v).norm() > 0.1)
        .prop_map(|(v, t)| rotation_axis_angle(Vec3(v), t).unwrap())
}

fn params() -> impl Strategy<Value = MonoclinicParams> {
    (0.95f64..1.1, 0.005f64..0.05, 0.9f64..1.1, 0.9f64..1.1)
        .prop_filter("generic d", |p| (p.3 - 1.0).abs() > 0.01)
        .prop_map(|(a, b, c, d)| MonoclinicParams::new(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eig_round_trip(m in sym()) {
        let e = eig_sym3(&m).unwrap();
        prop_assert!((e.reconstruct() - m).norm() <= 1e-12 * (1.0 + m.norm()));
        let q = e.basis();
        prop_assert!((q.transpose() * q - Mat3::identity()).norm() <= 1e-12);
        prop_assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
    }

    #[test]
    fn cofactor_is_multiplicative_and_covariant(a in general(), b in general(), q in rotation()) {
        let scale = 1.0 + a.norm().powi(2) * b.norm().powi(2);
        prop_assert!(((a * b).cofactor() - a.cofactor() * b.cofactor()).norm() <= 1e-11 * scale);
        let rotated = (q * a * q.transpose()).cofactor();
        prop_assert!((rotated - q * a.cofactor() * q.transpose()).norm() <= 1e-12 * (1.0 + a.norm().powi(2)));
        prop_assert!((a.transpose() * a.cofactor() - Mat3::identity() * a.det()).norm() <= 1e-11 * (1.0 + a.norm().powi(3)));
    }

    #[test]
    fn pair_quantities_are_orbit_covariant(p in params(), g in 0usize..24, j in 2usize..=12) {
        let tol = Tolerances::default();
        let vs = monoclinic_variants(&p).unwrap();
        let q = cubic_symmetry_group()[g];
        let (u, v) = (vs.get(1), vs.get(j));
        let (qu, qv) = (q * *u * q.transpose(), q * *v * q.transpose());
        prop_assert_eq!(classify_pair(u, v, &tol), classify_pair(&qu, &qv, &tol));
        if let Ok(m) = supercompat_metric(u, v, &tol) {
            let qm = supercompat_metric(&qu, &qv, &tol).unwrap();
            prop_assert!((m.type_i - qm.type_i).abs() <= 1e-10);
            prop_assert!((m.type_ii - qm.type_ii).abs() <= 1e-10);
        }
        // The orbit of a pair contains every image of it.
        let s = vs.permutation(&q).unwrap();
        let image = (s[0].min(s[j - 1]), s[0].max(s[j - 1]));
        prop_assert!(pair_orbit(&vs, (1, j)).contains(&image));
    }

    #[test]
    fn twins_solve_the_twinning_equation(p in params(), j in 2usize..=12) {
        let vs = monoclinic_variants(&p).unwrap();
        if let Ok(ts) = pair_twins(vs.get(1), vs.get(j), &Tolerances::default()) {
            for t in ts {
                prop_assert!(t.residual(vs.get(1), vs.get(j)) <= 1e-10);
                prop_assert!(t.rotation.rotation_defect() <= 1e-10);
                prop_assert!((t.m.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
