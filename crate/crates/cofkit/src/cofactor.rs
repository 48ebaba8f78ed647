//! Cofactor conditions and the metrics measuring how closely a twin meets them.
//!
//! Besides the classical residuals this module builds the triple-junction
//! matrices
//!
//! * `C* = U^2 - 1 + (1 + |U m|^2) m (x) m - (U^2 m (x) m + m (x) U^2 m)` (type II),
//! * `E* = U^2 - 1 - U b (x) U b / |b|^2 + w (x) w`, `w = U^-1 b / |U^-1 b|` (type I),
//!
//! which are the minimal values of `(U + c (x) m)^T (U + c (x) m) - 1` over `c`
//! and of `(U + b (x) o)^T (U + b (x) o) - 1` over `o`. Each has a zero
//! eigenvalue; the largest gap between its eigenvalues measures the shear
//! stress needed to close a triple junction without a transition layer.

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};
use crate::lattice::{monoclinic_variants, MonoclinicParams, VariantSet};
use crate::linalg3::{eig_sym3, Mat3, Vec3};
use crate::tolerances::Tolerances;
use crate::twinning::{pair_twins, twin_solutions, twofold_axes, TwinKind, TwinSolution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CofactorReport {
    pub kind: TwinKind,
    /// `|lambda_2 - 1|`.
    pub cc1_dev: f64,
    /// `|b . U cof(U^2 - 1) m|` with `m` unit.
    pub cc2_value: f64,
    /// `tr U^2 - det U^2 - |b|^2 |m|^2 / 4 - 2`.
    pub cc3_value: f64,
    pub cc3_ok: bool,
    /// `||U^-1 e| - 1|` (type I) or `||U e| - 1|` (type II); the smaller of
    /// the two for a compound twin.
    pub equivalent_dev: f64,
    /// Largest eigenvalue gap of `E*` (type I) or `C*` (type II); the smaller
    /// of the two for a compound twin.
    pub new_metric: f64,
    pub axis: Vec3,
}

/// A triple-junction matrix with its spectrum and closed-form minimizers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleJunction {
    pub matrix: Mat3,
    /// Ascending eigenvalues.
    pub eigenvalues: [f64; 3],
    /// Largest pairwise eigenvalue gap.
    pub gap: f64,
    /// The two minimizing vectors (`c+-` or `o+-`).
    pub minimizers: [Vec3; 2],
    /// Applicability guards that failed.
    pub warnings: Vec<String>,
}

fn spectrum(m: &Mat3) -> Result<([f64; 3], f64)> {
    let e = eig_sym3(&m.symmetric_part())?;
    let v = e.values;
    Ok((v, (v[2] - v[0]).max((v[1] - v[0]).abs()).max((v[2] - v[1]).abs())))
}

fn cofactor_of_strain(u: &Mat3) -> Mat3 {
    (*u * *u - Mat3::identity()).cofactor()
}

/// `|(U + c (x) m)^T (U + c (x) m) - 1|^2`.
pub fn c_objective(u: &Mat3, m: &Vec3, c: &Vec3) -> f64 {
    let f = *u + c.outer(m);
    (f.transpose() * f - Mat3::identity()).norm().powi(2)
}

/// `|(U + b (x) o)^T (U + b (x) o) - 1|^2`.
pub fn e_objective(u: &Mat3, b: &Vec3, o: &Vec3) -> f64 {
    let f = *u + b.outer(o);
    (f.transpose() * f - Mat3::identity()).norm().powi(2)
}

/// Type II triple-junction matrix for the twin normal `m`.
pub fn c_star(u: &Mat3, m: &Vec3) -> Result<TripleJunction> {
    let lam = eig_sym3(u)?.values;
    if lam[0] <= 0.0 {
        return Err(CofkitError::NotPositiveDefinite(format!("eigenvalue {:.6e}", lam[0])));
    }
    let m = m.normalized().ok_or(CofkitError::ZeroAxis)?;
    let u2 = *u * *u;
    let um = *u * m;
    let u2m = u2 * m;
    let matrix = (u2 - Mat3::identity() + m.outer(&m) * (1.0 + um.norm_sq())
        - (u2m.outer(&m) + m.outer(&u2m)))
    .symmetric_part();
    let (eigenvalues, gap) = spectrum(&matrix)?;
    let u_inv = u.inverse().ok_or(CofkitError::SingularGradient)?;
    let w = u_inv * m;
    let w = w * (1.0 / w.norm());
    let minimizers = [w - um, -w - um];

    let mut warnings = Vec::new();
    let guard = 2.0 * lam[0] * lam[0] - lam[2] * lam[2];
    if guard <= 0.0 {
        warnings.push(format!("C* guard 2 l1^2 - l3^2 = {guard:.3e} is not positive"));
    }
    let min_sq = matrix.norm().powi(2);
    if min_sq >= (guard * guard).min(1.0) {
        warnings.push(format!("C* guard: |C*|^2 = {min_sq:.3e} exceeds its bound"));
    }
    Ok(TripleJunction { matrix, eigenvalues, gap, minimizers, warnings })
}

/// Type I triple-junction matrix for the twin shear `b`.
pub fn e_star(u: &Mat3, b: &Vec3) -> Result<TripleJunction> {
    let lam = eig_sym3(u)?.values;
    if lam[0] <= 0.0 {
        return Err(CofkitError::NotPositiveDefinite(format!("eigenvalue {:.6e}", lam[0])));
    }
    let bb = b.norm_sq();
    if bb <= 1e-28 {
        return Err(CofkitError::ZeroShear);
    }
    let ub = *u * *b;
    let u_inv = u.inverse().ok_or(CofkitError::SingularGradient)?;
    let uib = u_inv * *b;
    let w = uib * (1.0 / uib.norm());
    let matrix =
        (*u * *u - Mat3::identity() - ub.outer(&ub) * (1.0 / bb) + w.outer(&w)).symmetric_part();
    let (eigenvalues, gap) = spectrum(&matrix)?;
    let s = uib * (1.0 / (uib.norm() * bb.sqrt()));
    let t = ub * (1.0 / bb);
    let minimizers = [s - t, -s - t];

    let mut warnings = Vec::new();
    let min_sq = matrix.norm().powi(2);
    if min_sq >= 1.0 {
        warnings.push(format!("E* guard: |E*|^2 = {min_sq:.3e} is not below one"));
    }
    Ok(TripleJunction { matrix, eigenvalues, gap, minimizers, warnings })
}

/// Cofactor residuals and metrics of one twin solution of `U`.
pub fn check_cc(u: &Mat3, twin: &TwinSolution) -> Result<CofactorReport> {
    let lam = eig_sym3(u)?.values;
    let cc1_dev = (lam[1] - 1.0).abs();
    let cc2_value = twin.b.dot(&(*u * cofactor_of_strain(u) * twin.m)).abs();
    let u2 = *u * *u;
    let cc3_value = u2.trace() - u2.det() - 0.25 * twin.b.norm_sq() * twin.m.norm_sq() - 2.0;
    let u_inv = u.inverse().ok_or(CofkitError::SingularGradient)?;
    // Axes read off the solution itself (m for type I, U^-1 b for type II), so a
    // compound twin gives the same values whichever axis generated it.
    let axis_one = twin.m.normalized().ok_or(CofkitError::ZeroAxis)?;
    let axis_two = (u_inv * twin.b).normalized().ok_or(CofkitError::ZeroShear)?;
    let dev_one = ((u_inv * axis_one).norm() - 1.0).abs();
    let dev_two = ((*u * axis_two).norm() - 1.0).abs();
    let (equivalent_dev, new_metric) = match twin.kind {
        TwinKind::TypeI => (dev_one, e_star(u, &twin.b)?.gap),
        TwinKind::TypeII => (dev_two, c_star(u, &twin.m)?.gap),
        TwinKind::Compound => (
            dev_one.min(dev_two),
            e_star(u, &twin.b)?.gap.min(c_star(u, &twin.m)?.gap),
        ),
    };
    Ok(CofactorReport {
        kind: twin.kind,
        cc1_dev,
        cc2_value,
        cc3_value,
        cc3_ok: cc3_value >= 0.0,
        equivalent_dev,
        new_metric,
        axis: twin.axis,
    })
}

/// New metric of one generating axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisMetric {
    pub axis: Vec3,
    pub type_i: f64,
    pub type_ii: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupercompatMetric {
    /// Smallest type I metric over the axes.
    pub type_i: f64,
    /// Smallest type II metric over the axes.
    pub type_ii: f64,
    /// One entry per two-fold axis (two for a compound pair).
    pub per_axis: Vec<AxisMetric>,
}

/// Finds the two-fold axes of `(U, V)`, builds both twins for each, and
/// returns the eigenvalue gaps of `E*` and `C*`.
pub fn supercompat_metric(u: &Mat3, v: &Mat3, tol: &Tolerances) -> Result<SupercompatMetric> {
    let axes = match twofold_axes(u, v, tol) {
        Err(CofkitError::IdenticalVariants) => return Err(CofkitError::NoTwoFoldAxis),
        other => other?,
    };
    if axes.is_empty() {
        return Err(CofkitError::NoTwoFoldAxis);
    }
    let mut per_axis = Vec::with_capacity(axes.len());
    for e in axes {
        let (t1, t2) = twin_solutions(u, &e)?;
        per_axis.push(AxisMetric {
            axis: e,
            type_i: e_star(u, &t1.b)?.gap,
            type_ii: c_star(u, &t2.m)?.gap,
        });
    }
    let type_i = per_axis.iter().map(|a| a.type_i).fold(f64::INFINITY, f64::min);
    let type_ii = per_axis.iter().map(|a| a.type_ii).fold(f64::INFINITY, f64::min);
    Ok(SupercompatMetric { type_i, type_ii, per_axis })
}

/// `G / 4` times the metric, and whether it stays below the shear yield stress.
pub fn tresca(metric: f64, shear_modulus: f64, yield_stress: f64) -> (f64, bool) {
    let stress = 0.25 * shear_modulus * metric;
    (stress, stress <= yield_stress)
}

/// Compound orbit whose triple junctions are characterized in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompoundOrbit {
    /// Orbit of the pair (1,2).
    Orbit12,
    /// Orbit of the pair (1,3).
    Orbit13,
}

impl CompoundOrbit {
    pub fn pair(self) -> (usize, usize) {
        match self {
            Self::Orbit12 => (1, 2),
            Self::Orbit13 => (1, 3),
        }
    }
}

/// Which triple-junction matrix a closed-form branch annihilates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JunctionMatrix {
    CStar,
    EStar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchResidual {
    pub label: String,
    /// Matrix that vanishes on this branch when also `d = 1`.
    pub vanishing: JunctionMatrix,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompoundJunctionReport {
    pub orbit: CompoundOrbit,
    /// `|d - 1|`.
    pub d_dev: f64,
    pub branches: Vec<BranchResidual>,
    /// Smallest `|C*|` over the compound solutions of the orbit pair.
    pub c_star_norm: f64,
    /// Smallest `|E*|` over the compound solutions of the orbit pair.
    pub e_star_norm: f64,
}

impl CompoundJunctionReport {
    /// Smallest branch residual for the given matrix.
    pub fn branch_min(&self, which: JunctionMatrix) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.vanishing == which)
            .map(|b| b.residual.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closed-form triple-junction branches of a compound orbit, with the direct
/// norms of `C*` and `E*` as a cross-check. `E* = 0` exactly when `d = 1` and
/// a `det U^2` branch holds; `C* = 0` when `d = 1` and a unit branch holds.
pub fn compound_triple_junction(
    p: &MonoclinicParams,
    orbit: CompoundOrbit,
    tol: &Tolerances,
) -> Result<CompoundJunctionReport> {
    let vs = monoclinic_variants(p)?;
    let MonoclinicParams { a, b, c, d } = *p;
    let det2 = (d * (a * c - b * b)).powi(2);
    let r = |label: &str, vanishing, residual| BranchResidual {
        label: label.to_string(),
        vanishing,
        residual,
    };
    let branches = match orbit {
        CompoundOrbit::Orbit12 => vec![
            r("a^2+b^2 = det U^2", JunctionMatrix::EStar, a * a + b * b - det2),
            r("c^2+b^2 = det U^2", JunctionMatrix::EStar, c * c + b * b - det2),
            r("a^2+b^2 = 1", JunctionMatrix::CStar, a * a + b * b - 1.0),
            r("c^2+b^2 = 1", JunctionMatrix::CStar, c * c + b * b - 1.0),
        ],
        CompoundOrbit::Orbit13 => {
            let plus = (a + b).powi(2) + (b + c).powi(2);
            let minus = (a - b).powi(2) + (b - c).powi(2);
            vec![
                r("(a+b)^2+(b+c)^2 = 2 det U^2", JunctionMatrix::EStar, plus - 2.0 * det2),
                r("(a-b)^2+(b-c)^2 = 2 det U^2", JunctionMatrix::EStar, minus - 2.0 * det2),
                r("(a+b)^2+(b+c)^2 = 2", JunctionMatrix::CStar, plus - 2.0),
                r("(a-b)^2+(b-c)^2 = 2", JunctionMatrix::CStar, minus - 2.0),
            ]
        }
    };
    let (i, j) = orbit.pair();
    let (c_star_norm, e_star_norm) = compound_star_norms(&vs, i, j, tol)?;
    Ok(CompoundJunctionReport { orbit, d_dev: (d - 1.0).abs(), branches, c_star_norm, e_star_norm })
}

fn compound_star_norms(vs: &VariantSet, i: usize, j: usize, tol: &Tolerances) -> Result<(f64, f64)> {
    let u = vs.get(i);
    let axes = twofold_axes(u, vs.get(j), tol)?;
    let (mut cn, mut en) = (f64::INFINITY, f64::INFINITY);
    for e in axes {
        let (t1, t2) = twin_solutions(u, &e)?;
        for t in [t1, t2] {
            cn = cn.min(c_star(u, &t.m)?.matrix.norm());
            en = en.min(e_star(u, &t.b)?.matrix.norm());
        }
    }
    Ok((cn, en))
}

/// Best values over the type I/II twin systems of a material, each metric
/// minimized independently over the pairs `(1, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CofactorSummary {
    pub lambda2_dev: f64,
    pub cc2_type_i: f64,
    pub cc2_type_ii: f64,
    pub equivalent_dev_type_i: f64,
    pub equivalent_dev_type_ii: f64,
    pub metric_type_i: f64,
    pub metric_type_ii: f64,
    /// Pair attaining the smallest type II metric.
    pub best_pair_type_ii: (usize, usize),
    /// Pair attaining the smallest type I metric.
    pub best_pair_type_i: (usize, usize),
}

pub fn cofactor_summary(vs: &VariantSet, tol: &Tolerances) -> Result<CofactorSummary> {
    let u = vs.get(1);
    let lambda2_dev = (eig_sym3(u)?.values[1] - 1.0).abs();
    let mut s = CofactorSummary {
        lambda2_dev,
        cc2_type_i: f64::INFINITY,
        cc2_type_ii: f64::INFINITY,
        equivalent_dev_type_i: f64::INFINITY,
        equivalent_dev_type_ii: f64::INFINITY,
        metric_type_i: f64::INFINITY,
        metric_type_ii: f64::INFINITY,
        best_pair_type_ii: (0, 0),
        best_pair_type_i: (0, 0),
    };
    for j in 2..=vs.len() {
        let twins = match pair_twins(u, vs.get(j), tol) {
            Ok(t) => t,
            Err(CofkitError::NoTwoFoldAxis | CofkitError::IdenticalVariants) => continue,
            Err(e) => return Err(e),
        };
        for t in twins {
            let r = check_cc(u, &t)?;
            match t.kind {
                TwinKind::TypeI => {
                    s.cc2_type_i = s.cc2_type_i.min(r.cc2_value);
                    s.equivalent_dev_type_i = s.equivalent_dev_type_i.min(r.equivalent_dev);
                    if r.new_metric < s.metric_type_i {
                        s.metric_type_i = r.new_metric;
                        s.best_pair_type_i = (1, j);
                    }
                }
                TwinKind::TypeII => {
                    s.cc2_type_ii = s.cc2_type_ii.min(r.cc2_value);
                    s.equivalent_dev_type_ii = s.equivalent_dev_type_ii.min(r.equivalent_dev);
                    if r.new_metric < s.metric_type_ii {
                        s.metric_type_ii = r.new_metric;
                        s.best_pair_type_ii = (1, j);
                    }
                }
                TwinKind::Compound => {}
            }
        }
    }
    if s.best_pair_type_ii == (0, 0) {
        return Err(CofkitError::NoTwoFoldAxis);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_star_has_zero_eigenvalue_and_m_in_kernel() {
        let u = Mat3::new([[1.02, 0.01, 0.0], [0.01, 0.97, 0.02], [0.0, 0.02, 1.05]]);
        let m = Vec3::new(0.3, -0.4, 0.5);
        let cs = c_star(&u, &m).unwrap();
        assert!(cs.eigenvalues.iter().any(|l| l.abs() < 1e-12));
        let mu = m.normalized().unwrap();
        assert!((cs.matrix * mu).norm() < 1e-12);
        let tr = cs.matrix.trace();
        let tr2 = (cs.matrix * cs.matrix).trace();
        let root = (2.0 * tr2 - tr * tr).max(0.0).sqrt();
        let mut closed = [0.5 * (tr - root), 0.0, 0.5 * (tr + root)];
        closed.sort_by(f64::total_cmp);
        for k in 0..3 {
            assert!((closed[k] - cs.eigenvalues[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn e_star_has_zero_eigenvalue() {
        let u = Mat3::new([[1.02, 0.01, 0.0], [0.01, 0.97, 0.02], [0.0, 0.02, 1.05]]);
        let b = Vec3::new(0.1, 0.05, -0.02);
        let es = e_star(&u, &b).unwrap();
        assert!(es.eigenvalues.iter().any(|l| l.abs() < 1e-12));
        assert_eq!(e_star(&u, &Vec3::zero()).unwrap_err(), CofkitError::ZeroShear);
    }

    #[test]
    fn minimizers_attain_star_norm() {
        let u = Mat3::new([[1.02, 0.01, 0.0], [0.01, 0.97, 0.02], [0.0, 0.02, 1.05]]);
        let m = Vec3::new(0.3, -0.4, 0.5).normalized().unwrap();
        let cs = c_star(&u, &m).unwrap();
        for c in cs.minimizers {
            assert!((c_objective(&u, &m, &c) - cs.matrix.norm().powi(2)).abs() < 1e-14);
        }
        let b = Vec3::new(0.1, 0.05, -0.02);
        let es = e_star(&u, &b).unwrap();
        for o in es.minimizers {
            assert!((e_objective(&u, &b, &o) - es.matrix.norm().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn tresca_scaling() {
        assert_eq!(tresca(0.02, 40.0, 0.3), (0.2, true));
        assert!(!tresca(0.02, 40.0, 0.1).1);
    }
}
