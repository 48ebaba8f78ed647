//! Austenite/martensite interfaces: solutions of `R F = 1 + a (x) n`.

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};
use crate::linalg3::{polar, svd3, Mat3, Vec3};
use crate::tolerances::{Tolerances, HABIT_RESIDUAL_TOL, ROTATION_DRIFT_TOL};
use crate::twinning::TwinSolution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HabitSolution {
    pub rotation: Mat3,
    pub a: Vec3,
    /// Unit habit normal, first nonzero component positive.
    pub n: Vec3,
    /// Volume fraction of the laminate, when the gradient came from one.
    pub mu: Option<f64>,
}

impl HabitSolution {
    /// `|R F - 1 - a (x) n|`.
    pub fn residual(&self, f: &Mat3) -> f64 {
        (self.rotation * *f - Mat3::identity() - self.a.outer(&self.n)).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HabitStatus {
    /// Two distinct solutions.
    Regular,
    /// `sigma_1 = 1` or `sigma_3 = 1`: the two solutions coincide.
    Degenerate,
    /// `F` is a rotation: `a = 0` and any normal works.
    TrivialInterface,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HabitSet {
    pub status: HabitStatus,
    /// `|sigma_2 - 1|` before projection.
    pub sigma2_deviation: f64,
    pub solutions: Vec<HabitSolution>,
}

/// `U + mu b (x) m`.
pub fn laminate_gradient(u: &Mat3, twin: &TwinSolution, mu: f64) -> Result<Mat3> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(CofkitError::FractionOutOfRange(mu));
    }
    Ok(*u + twin.b.outer(&twin.m) * mu)
}

/// `|sqrt(lambda_2(F^T F)) - 1|`, i.e. the middle singular value's distance to one.
pub fn middle_eigenvalue_deviation(f: &Mat3) -> Result<f64> {
    if !(f.det() > 0.0) || !f.is_finite() {
        return Err(CofkitError::SingularGradient);
    }
    Ok((svd3(f).sigma[1] - 1.0).abs())
}

/// Interface solutions of `R F = 1 + a (x) n`, up to the sign flip `(a, n) -> (-a, -n)`.
///
/// The normal follows from `C = F^T F = 1 + (l1 - 1) e1 (x) e1 + (l3 - 1) e3 (x) e3`:
/// `F` is an isometry exactly on the planes `n . x = 0` with
/// `n ~ -sqrt(1 - l1) e1 + k sqrt(l3 - 1) e3`, `k = +-1`. The rotation maps
/// `F t` back to `t` on that plane and `a = (R F - 1) n`.
pub fn habit_solutions(f: &Mat3, tol: &Tolerances) -> Result<HabitSet> {
    if !(f.det() > 0.0) || !f.is_finite() {
        return Err(CofkitError::SingularGradient);
    }
    let svd = svd3(f);
    let deviation = (svd.sigma[1] - 1.0).abs();
    if deviation > tol.habit_sigma2 {
        return Err(CofkitError::NoSolution { deviation });
    }
    let s_max = svd.sigma[0].max(1.0);
    let s_min = svd.sigma[2].min(1.0);
    let fp = svd.u * Mat3::diag(s_max, 1.0, s_min) * svd.v.transpose();
    let (l1, l3) = (s_min * s_min, s_max * s_max);
    let (e1, e3) = (svd.v.col(2), svd.v.col(0));

    let (lo, hi) = (1.0 - l1, l3 - 1.0);
    let flat = 1e-14;
    if lo <= flat && hi <= flat {
        let (rotation, _) = polar(&fp)?;
        let sol = HabitSolution {
            rotation: rotation.transpose(),
            a: Vec3::zero(),
            n: Vec3::unit(2),
            mu: None,
        };
        return Ok(HabitSet {
            status: HabitStatus::TrivialInterface,
            sigma2_deviation: deviation,
            solutions: vec![sol],
        });
    }
    let status = if lo <= flat || hi <= flat { HabitStatus::Degenerate } else { HabitStatus::Regular };

    let mut solutions = Vec::with_capacity(2);
    for kappa in [1.0, -1.0] {
        let n = (e1 * -lo.max(0.0).sqrt() + e3 * (kappa * hi.max(0.0).sqrt()))
            .normalized()
            .ok_or(CofkitError::SingularGradient)?;
        let t1 = svd.v.col(1);
        let t2 = n.cross(&t1);
        let src = Mat3::from_cols(fp * t1, fp * t2, (fp * t1).cross(&(fp * t2)));
        let dst = Mat3::from_cols(t1, t2, t1.cross(&t2));
        let mut rotation = dst * src.inverse().ok_or(CofkitError::SingularGradient)?;
        if rotation.rotation_defect() > ROTATION_DRIFT_TOL {
            rotation = polar(&rotation)?.0;
        }
        let a = (rotation * fp - Mat3::identity()) * n;
        let (n, flipped) = n.sign_normalized();
        let a = if flipped { -a } else { a };
        let sol = HabitSolution { rotation, a, n, mu: None };
        let residual = sol.residual(&fp);
        if residual > HABIT_RESIDUAL_TOL * fp.norm().max(1.0) {
            return Err(CofkitError::NonConvergence { iterations: 0, residual });
        }
        solutions.push(sol);
    }
    Ok(HabitSet { status, sigma2_deviation: deviation, solutions })
}

/// Habit solutions of the laminate `U + mu b (x) m`, tagged with `mu`.
pub fn laminate_habit(u: &Mat3, twin: &TwinSolution, mu: f64, tol: &Tolerances) -> Result<HabitSet> {
    let f = laminate_gradient(u, twin, mu)?;
    let mut set = habit_solutions(&f, tol)?;
    for s in &mut set.solutions {
        s.mu = Some(mu);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn middle_deviation_examples() {
        assert_eq!(middle_eigenvalue_deviation(&Mat3::identity()).unwrap(), 0.0);
        assert!(middle_eigenvalue_deviation(&Mat3::diag(0.9, 1.0, 1.1)).unwrap() < 1e-15);
        assert_eq!(
            middle_eigenvalue_deviation(&Mat3::diag(1.0, -1.0, 1.0)),
            Err(CofkitError::SingularGradient)
        );
    }

    #[test]
    fn identity_is_trivial() {
        let set = habit_solutions(&Mat3::identity(), &Tolerances::default()).unwrap();
        assert_eq!(set.status, HabitStatus::TrivialInterface);
        assert_eq!(set.solutions[0].a, Vec3::zero());
    }

    #[test]
    fn recovers_rank_one() {
        let s = Vec3::new(0.2, -0.5, 0.8).normalized().unwrap();
        let t = Vec3::new(0.03, 0.01, -0.02);
        let f = Mat3::identity() + t.outer(&s);
        let set = habit_solutions(&f, &Tolerances::default()).unwrap();
        let (s_n, flipped) = s.sign_normalized();
        let t_n = if flipped { -t } else { t };
        assert!(set
            .solutions
            .iter()
            .any(|h| (h.n - s_n).norm() < 1e-10 && (h.a - t_n).norm() < 1e-10));
    }

    #[test]
    fn rejects_bad_middle_value() {
        let err = habit_solutions(&Mat3::diag(0.9, 1.01, 1.1), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, CofkitError::NoSolution { .. }));
    }

    #[test]
    fn fraction_range() {
        let t = TwinSolution {
            rotation: Mat3::identity(),
            b: Vec3::unit(0),
            m: Vec3::unit(1),
            kind: crate::twinning::TwinKind::TypeI,
            axis: Vec3::unit(1),
        };
        assert_eq!(laminate_gradient(&Mat3::identity(), &t, 1.5), Err(CofkitError::FractionOutOfRange(1.5)));
        assert_eq!(laminate_gradient(&Mat3::identity(), &t, 0.0).unwrap(), Mat3::identity());
    }
}
