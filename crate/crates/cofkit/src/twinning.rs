//! Twinning equation between two variants.
//!
//! For variants related by a half turn `V = Q U Q`, `Q = -1 + 2 e (x) e`, the
//! equation `R V - U = b (x) m` has exactly two solutions, built in closed form
//! from the axis `e`. Pairs related by two independent half turns are compound.

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};
use crate::linalg3::{eig_sym3, polar, Mat3, SymEig3, Vec3};
use crate::tolerances::{Tolerances, AXIS_MERGE_TOL, ROTATION_DRIFT_TOL, TWIN_RESIDUAL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwinKind {
    TypeI,
    TypeII,
    Compound,
}

/// Classification of a variant pair by its number of two-fold axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairClass {
    TypeOneTwo,
    Compound,
    Incompatible,
}

/// One solution of `R V - U = b (x) m`, with `m` unit and sign-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinSolution {
    pub rotation: Mat3,
    pub b: Vec3,
    pub m: Vec3,
    pub kind: TwinKind,
    /// Generating two-fold axis.
    pub axis: Vec3,
}

impl TwinSolution {
    /// `|R V - U - b (x) m|`.
    pub fn residual(&self, u: &Mat3, v: &Mat3) -> f64 {
        (self.rotation * *v - *u - self.b.outer(&self.m)).norm()
    }

    /// Half turn about the generating axis.
    pub fn half_turn(&self) -> Mat3 {
        half_turn(&self.axis)
    }
}

/// `-1 + 2 e (x) e` for unit `e`.
pub fn half_turn(e: &Vec3) -> Mat3 {
    e.outer(e) * 2.0 - Mat3::identity()
}

fn positive_definite(u: &Mat3) -> Result<SymEig3> {
    let e = eig_sym3(u)?;
    if e.values[0] <= 0.0 {
        return Err(CofkitError::NotPositiveDefinite(format!(
            "smallest eigenvalue {:.6e}",
            e.values[0]
        )));
    }
    Ok(e)
}

/// Groups of (numerically) equal eigenvalues as index lists.
fn clusters(values: &[f64; 3]) -> Vec<Vec<usize>> {
    let scale = values[2].abs().max(1.0);
    let mut out: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..3 {
        if (values[i] - values[i - 1]).abs() <= 1e-9 * scale {
            out.last_mut().expect("nonempty").push(i);
        } else {
            out.push(vec![i]);
        }
    }
    out
}

fn push_axis(out: &mut Vec<Vec3>, e: Vec3) {
    let e = e.sign_normalized().0;
    if !out.iter().any(|f| f.line_angle(&e) <= AXIS_MERGE_TOL) {
        out.push(e);
    }
}

/// All half-turn axes `e` (up to sign) with `Q U Q = V`.
///
/// Every rotation taking `U` to `V` maps eigenvectors to eigenvectors, so for
/// distinct eigenvalues the candidates are the four proper sign choices of
/// `sum_i s_i v_i (x) u_i`; the half turns among them are kept. For a double
/// eigenvalue the simple eigenvectors `s`, `t` must be exchanged up to sign,
/// which leaves the axes along `s + t` and `s - t`.
pub fn twofold_axes(u: &Mat3, v: &Mat3, tol: &Tolerances) -> Result<Vec<Vec3>> {
    let eu = positive_definite(u)?;
    let ev = positive_definite(v)?;
    if (*u - *v).norm() <= 1e-12 * u.norm() {
        return Err(CofkitError::IdenticalVariants);
    }
    let scale = u.norm();
    let same_spectrum = (0..3).all(|i| (eu.values[i] - ev.values[i]).abs() <= tol.axis_residual * scale);
    if !same_spectrum {
        return Ok(Vec::new());
    }

    let mut candidates = Vec::new();
    let groups = clusters(&eu.values);
    match groups.len() {
        3 => {
            for signs in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
                for flip in [1.0, -1.0] {
                    // `flip` covers a handedness mismatch between the two bases.
                    let r = (0..3).fold(Mat3::zero(), |acc, i| {
                        acc + ev.vectors[i].outer(&eu.vectors[i]) * (signs[i] * flip)
                    });
                    if r.det() < 0.0 || r.asymmetry() > 1e-6 || r.trace() >= 0.0 {
                        continue;
                    }
                    let p = eig_sym3(&((r + Mat3::identity()) * 0.5).symmetric_part())?;
                    candidates.push(p.vectors[2]);
                }
            }
        }
        2 => {
            let simple = |e: &SymEig3| {
                let g = groups.iter().find(|g| g.len() == 1).expect("one simple eigenvalue");
                e.vectors[g[0]]
            };
            let (s, t) = (simple(&eu), simple(&ev));
            for w in [s + t, s - t] {
                if let Some(w) = w.normalized() {
                    candidates.push(w);
                }
            }
        }
        _ => return Err(CofkitError::IdenticalVariants),
    }

    let mut axes = Vec::new();
    for e in candidates {
        let q = half_turn(&e);
        if (q * *u * q - *v).norm() <= tol.axis_residual * scale {
            push_axis(&mut axes, e);
        }
    }
    // Deterministic order: lexicographically largest first.
    axes.sort_by(|a, b| {
        b.0.iter()
            .zip(a.0.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(axes)
}

/// Type I and type II solutions generated by the axis `e`, with `V = Q U Q`.
pub fn twin_solutions(u: &Mat3, e: &Vec3) -> Result<(TwinSolution, TwinSolution)> {
    positive_definite(u)?;
    let e = e.normalized().ok_or(CofkitError::ZeroAxis)?.sign_normalized().0;
    let q = half_turn(&e);
    let v = q * *u * q;
    let u_inv = u.inverse().ok_or(CofkitError::SingularGradient)?;
    let ue = *u * e;
    let uie = u_inv * e;

    let b1 = (uie * (1.0 / uie.norm_sq()) - ue) * 2.0;
    let m1 = e;
    let b2 = ue;
    let m2 = (e - *u * ue * (1.0 / ue.norm_sq())) * 2.0;
    if b1.norm() <= 1e-14 * u.norm() || m2.norm() <= 1e-14 {
        return Err(CofkitError::DegenerateAxis);
    }
    let build = |b: Vec3, m: Vec3, kind: TwinKind| -> Result<TwinSolution> {
        let len = m.norm();
        let (m, flipped) = (m * (1.0 / len)).sign_normalized();
        let b = if flipped { -b * len } else { b * len };
        let v_inv = v.inverse().ok_or(CofkitError::SingularGradient)?;
        let mut rotation = (*u + b.outer(&m)) * v_inv;
        if rotation.rotation_defect() > ROTATION_DRIFT_TOL {
            rotation = polar(&rotation)?.0;
        }
        let sol = TwinSolution { rotation, b, m, kind, axis: e };
        let residual = sol.residual(u, &v);
        if residual > TWIN_RESIDUAL_TOL * u.norm() || rotation.rotation_defect() > 1e-10 {
            return Err(CofkitError::NonConvergence { iterations: 0, residual });
        }
        Ok(sol)
    };
    Ok((build(b1, m1, TwinKind::TypeI)?, build(b2, m2, TwinKind::TypeII)?))
}

/// Classification by the number of two-fold axes relating `U` and `V`.
pub fn classify_pair(u: &Mat3, v: &Mat3, tol: &Tolerances) -> PairClass {
    match twofold_axes(u, v, tol).map(|a| a.len()) {
        Ok(1) => PairClass::TypeOneTwo,
        Ok(n) if n >= 2 => PairClass::Compound,
        _ => PairClass::Incompatible,
    }
}

/// Twin solutions of a pair: type I and type II for a single axis; for a
/// compound pair the two distinct solutions, both tagged compound.
pub fn pair_twins(u: &Mat3, v: &Mat3, tol: &Tolerances) -> Result<Vec<TwinSolution>> {
    let axes = twofold_axes(u, v, tol)?;
    match axes.len() {
        0 => Err(CofkitError::NoTwoFoldAxis),
        1 => {
            let (s1, s2) = twin_solutions(u, &axes[0])?;
            Ok(vec![s1, s2])
        }
        _ => {
            let (mut s1, mut s2) = twin_solutions(u, &axes[0])?;
            s1.kind = TwinKind::Compound;
            s2.kind = TwinKind::Compound;
            Ok(vec![s1, s2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{monoclinic_variants, MonoclinicParams};

    fn zn() -> Vec<Mat3> {
        monoclinic_variants(&MonoclinicParams::new(1.0015, 0.0073, 1.0591, 0.9363))
            .unwrap()
            .variants
    }

    #[test]
    fn compound_pair_has_two_axes() {
        let u = zn();
        let axes = twofold_axes(&u[0], &u[1], &Tolerances::default()).unwrap();
        assert_eq!(axes, vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]);
    }

    #[test]
    fn axis_counts_against_u1() {
        let u = zn();
        let tol = Tolerances::default();
        let counts: Vec<usize> =
            (1..12).map(|j| twofold_axes(&u[0], &u[j], &tol).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 2, 2, 1, 1, 0, 0, 0, 0, 1, 1]);
    }

    #[test]
    fn diagonal_type_one() {
        let (l1, l3) = (0.93, 1.06);
        let u = Mat3::diag(l1, 1.0, l3);
        let e = Vec3::new(1.0, 0.0, 0.0);
        let q = half_turn(&e);
        assert!((q * u * q - u).norm() < 1e-15);
        // A diagonal U commutes with every coordinate half turn, so V = U.
        // The type I shear 2(U^-1 e / |U^-1 e|^2 - U e) vanishes on an eigenvector.
        assert_eq!(twin_solutions(&u, &e).unwrap_err(), CofkitError::DegenerateAxis);
    }

    #[test]
    fn identical_variants_error() {
        let u = zn();
        assert_eq!(twofold_axes(&u[0], &u[0], &Tolerances::default()), Err(CofkitError::IdenticalVariants));
    }

    #[test]
    fn residuals_hold() {
        let u = zn();
        let tol = Tolerances::default();
        for j in 1..12 {
            for e in twofold_axes(&u[0], &u[j], &tol).unwrap() {
                let (s1, s2) = twin_solutions(&u[0], &e).unwrap();
                for s in [s1, s2] {
                    assert!(s.residual(&u[0], &u[j]) <= 1e-10 * u[0].norm());
                    assert!((s.m.norm() - 1.0).abs() < 1e-14);
                    assert!(s.rotation.rotation_defect() < 1e-12);
                }
            }
        }
    }
}
