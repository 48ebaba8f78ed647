//! Rank-one connections to the identity inside two-well quasiconvex hulls.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cofactor::check_cc;
use crate::error::{CofkitError, Result};
use crate::habit::laminate_habit;
use crate::lattice::{monoclinic_variants, MonoclinicParams};
use crate::linalg3::{eig_sym3, polar, Mat3, Vec3};
use crate::tolerances::Tolerances;
use crate::twinning::{twin_solutions, twofold_axes, TwinKind, TwinSolution};

/// `1 + a (x) n` in the hull, with `n` unit and sign-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityConnection {
    pub a: Vec3,
    pub n: Vec3,
    /// Rotation with `R F = 1 + a (x) n` for the generating gradient `F`.
    pub rotation: Mat3,
    /// Variant (1-based) whose pure interface this is, for compound pairs.
    pub well: Option<usize>,
    /// Laminate fraction, for type I/II families.
    pub mu: Option<f64>,
    pub residual: f64,
}

impl IdentityConnection {
    pub fn gradient(&self) -> Mat3 {
        Mat3::identity() + self.a.outer(&self.n)
    }
}

/// Orthonormal completion `(w1, w2)` of a unit vector `v`.
fn plane_basis(v: &Vec3) -> (Vec3, Vec3) {
    let k = (0..3).min_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap_or(0);
    let w1 = v.cross(&Vec3::unit(k)).normalized().expect("v is unit");
    (w1, v.cross(&w1))
}

/// A unit eigenvector shared by `A` and `B` with a common eigenvalue,
/// preferring the eigenvalue farthest from one.
fn shared_eigenvector(a: &Mat3, b: &Mat3, tol: f64) -> Result<Option<(Vec3, f64)>> {
    let ea = eig_sym3(a)?;
    let scale = a.norm().max(b.norm());
    let mut best: Option<(Vec3, f64)> = None;
    for k in 0..3 {
        let (v, l) = (ea.vectors[k], ea.values[k]);
        if (*b * v - v * l).norm() <= tol * scale
            && best.map_or(true, |(_, lb)| (l - 1.0).abs() > (lb - 1.0).abs())
        {
            best = Some((v, l));
        }
    }
    Ok(best)
}

/// Compound pair: the four products `a (x) n` with `1 + a (x) n` in the hull of
/// `SO(3) U_i u SO(3) U_j`. Each one is a pure-variant interface.
pub fn compound_identity_connections(
    p: &MonoclinicParams,
    pair: (usize, usize),
    tol: &Tolerances,
) -> Result<Vec<IdentityConnection>> {
    let vs = monoclinic_variants(p)?;
    if pair.0 == 0 || pair.1 == 0 || pair.0 > vs.len() || pair.1 > vs.len() {
        return Err(CofkitError::InvalidInput(format!("pair {pair:?} out of range")));
    }
    let (ui, uj) = (*vs.get(pair.0), *vs.get(pair.1));
    let axes = twofold_axes(&ui, &uj, tol)?;
    if axes.len() < 2 {
        return Err(CofkitError::HypothesisViolated(format!(
            "pair {pair:?} has {} two-fold axes; a compound pair needs two",
            axes.len()
        )));
    }
    if (p.d - 1.0).abs() <= tol.generic {
        return Err(CofkitError::DegenerateD);
    }
    let lam = eig_sym3(&ui)?.values;
    if (lam[1] - 1.0).abs() > tol.cc_gate {
        return Err(CofkitError::Cc1Violated { deviation: (lam[1] - 1.0).abs() });
    }
    let (v, d) = shared_eigenvector(&ui, &uj, 1e-9)?.ok_or(CofkitError::WellsIncompatible)?;
    let det = ui.det();
    let denom = det * det - d.powi(4);
    let n3_sq = d * d * (1.0 - d * d) / denom;
    if !(n3_sq > 0.0 && n3_sq < 1.0) {
        return Err(CofkitError::HypothesisViolated(format!("n3^2 = {n3_sq:.6e} outside (0, 1)")));
    }
    let n3 = n3_sq.sqrt();

    // Directions in the plane where |U_i w| = |U_j w|: the bisectors of the
    // eigenvectors of U_i^2 - U_j^2 restricted to the plane.
    let (w1, w2) = plane_basis(&v);
    let s = ui * ui - uj * uj;
    let s_plane = Mat3::new([
        [w1.dot(&(s * w1)), w1.dot(&(s * w2)), 0.0],
        [w2.dot(&(s * w1)), w2.dot(&(s * w2)), 0.0],
        [0.0, 0.0, 0.0],
    ]);
    let es = eig_sym3(&s_plane.symmetric_part())?;
    let lift = |x: &Vec3| w1 * x[0] + w2 * x[1];
    let planar: Vec<Vec3> = (0..3).filter(|&k| es.vectors[k][2].abs() < 0.5).map(|k| lift(&es.vectors[k])).collect();
    if planar.len() != 2 {
        return Err(CofkitError::WellsIncompatible);
    }
    let v_plus = (planar[0] + planar[1]) * FRAC_1_SQRT_2;
    let v_minus = (planar[0] - planar[1]) * FRAC_1_SQRT_2;
    let r_sq = |w: &Vec3| d * d / denom * ((ui * *w).norm_sq() - 1.0);
    let (r1, r2) = (r_sq(&v_plus), r_sq(&v_minus));
    if r1 < -tol.generic || r2 < -tol.generic {
        return Err(CofkitError::HypothesisViolated(format!("negative line offsets {r1:.3e}, {r2:.3e}")));
    }
    let (r1, r2) = (r1.max(0.0).sqrt(), r2.max(0.0).sqrt());

    let mut out = Vec::with_capacity(4);
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let n = v_plus * (s1 * r1) + v_minus * (s2 * r2) + v * n3;
            let a = n * (det - d * d) - v * ((1.0 - d * d) / n3);
            let f = Mat3::identity() + a.outer(&n);
            let mut found = None;
            for (idx, uk) in [(pair.0, ui), (pair.1, uj)] {
                let r = f * uk.inverse().ok_or(CofkitError::SingularGradient)?;
                let defect = r.rotation_defect();
                if found.map_or(true, |(_, _, best)| defect < best) {
                    found = Some((idx, r, defect));
                }
            }
            let (well, r, defect) = found.expect("two wells");
            let rotation = polar(&r)?.0;
            let (n, flipped) = n.sign_normalized();
            let a = if flipped { -a } else { a };
            out.push(IdentityConnection { a, n, rotation, well: Some(well), mu: None, residual: defect });
        }
    }
    let worst = out.iter().map(|c| c.residual).fold(0.0, f64::max);
    if worst > tol.generic.max(1e-10) * 1e2 {
        return Err(CofkitError::NonConvergence { iterations: 0, residual: worst });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Membership

/// Minimum over the unit circle of `max(fa, fb)` for `f = c0 + c1 cos t + c2 sin t`.
fn min_of_max_sinusoids(fa: [f64; 3], fb: [f64; 3]) -> f64 {
    let eval = |f: &[f64; 3], t: f64| f[0] + f[1] * t.cos() + f[2] * t.sin();
    let mut cands = vec![(-fa[2]).atan2(-fa[1]), (-fb[2]).atan2(-fb[1])];
    let k = [fa[0] - fb[0], fa[1] - fb[1], fa[2] - fb[2]];
    let kn = k[1].hypot(k[2]);
    if kn > 0.0 && k[0].abs() <= kn {
        let base = k[2].atan2(k[1]);
        let off = (-k[0] / kn).acos();
        cands.push(base + off);
        cands.push(base - off);
    }
    cands.iter().map(|&t| eval(&fa, t).max(eval(&fb, t))).fold(f64::INFINITY, f64::min)
}

/// Planar coefficients of `e^T X e` for `e = cos(t/2) w1 + sin(t/2) w2`.
fn planar_form(x: &Mat3, w1: &Vec3, w2: &Vec3) -> [f64; 3] {
    let (p, q, r) = (w1.dot(&(*x * *w1)), w2.dot(&(*x * *w2)), w1.dot(&(*x * *w2)));
    [(p + q) / 2.0, (p - q) / 2.0, r]
}

/// Ball-James frame of a rank-one connected pair `(U, b, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullRegion {
    pub delta: f64,
    pub frame: [Vec3; 3],
    pub l: Mat3,
    pub det_u: f64,
}

impl HullRegion {
    pub fn new(u: &Mat3, b: &Vec3, m: &Vec3) -> Result<Self> {
        let ui = u.inverse().ok_or(CofkitError::SingularGradient)?;
        let uim = ui * *m;
        let u1 = uim.normalized().ok_or(CofkitError::ZeroShear)?;
        let u3 = b.normalized().ok_or(CofkitError::ZeroShear)?;
        let u2 = u1.cross(&u3);
        let delta = 0.5 * b.norm() * uim.norm();
        let l = ui * (Mat3::identity() - u3.outer(&u1) * delta);
        Ok(Self { delta, frame: [u1, u2, u3], l, det_u: u.det() })
    }

    pub fn m(&self, alpha: f64, beta: f64, gamma: f64) -> Mat3 {
        let [u1, u2, u3] = self.frame;
        u1.outer(&u1) * alpha + u2.outer(&u2) + u3.outer(&u3) * gamma + (u1.outer(&u3) + u3.outer(&u1)) * beta
    }

    /// `L^-T M L^-1`, the Cauchy-Green tensor of the hull point.
    pub fn cauchy_green(&self, alpha: f64, beta: f64, gamma: f64) -> Result<Mat3> {
        let li = self.l.inverse().ok_or(CofkitError::SingularGradient)?;
        Ok(li.transpose() * self.m(alpha, beta, gamma) * li)
    }

    pub fn f1(&self, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
        Ok((self.cauchy_green(alpha, beta, gamma)? - Mat3::identity()).det())
    }

    /// Product of the largest and smallest eigenvalues of `L^-T M L^-1 - 1`.
    pub fn phi(&self, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
        let e = eig_sym3(&(self.cauchy_green(alpha, beta, gamma)? - Mat3::identity()).symmetric_part())?;
        Ok(e.values[0] * e.values[2])
    }

    /// `det U^2 f1((1 + beta^2) / gamma, beta, gamma)`.
    pub fn g(&self, beta: f64, gamma: f64) -> Result<f64> {
        Ok(self.det_u * self.det_u * self.f1((1.0 + beta * beta) / gamma, beta, gamma)?)
    }

    /// Coordinates `(alpha, beta, gamma)` of `F^T F`, with the size of the
    /// entries that must vanish.
    pub fn coordinates(&self, f: &Mat3) -> ([f64; 3], f64) {
        let mm = self.l.transpose() * f.transpose() * *f * self.l;
        let [u1, u2, u3] = self.frame;
        let e = |x: &Vec3, y: &Vec3| x.dot(&(mm * *y));
        let off = e(&u1, &u2).abs().max(e(&u2, &u3).abs()).max((e(&u2, &u2) - 1.0).abs());
        ([e(&u1, &u1), e(&u1, &u3), e(&u3, &u3)], off)
    }

    /// Whether `F^T F` lies in the region `0 < alpha <= 1 + delta^2`,
    /// `0 < gamma <= 1`, `alpha gamma - beta^2 = 1`.
    pub fn contains(&self, f: &Mat3, tol: f64) -> bool {
        let ([al, be, ga], off) = self.coordinates(f);
        off <= tol
            && (al * ga - be * be - 1.0).abs() <= tol
            && al > 0.0
            && al <= 1.0 + self.delta * self.delta + tol
            && ga > 0.0
            && ga <= 1.0 + tol
            && (f.det() - self.det_u).abs() <= tol * self.det_u.abs().max(1.0)
    }
}

/// Whether `F` lies in the quasiconvex hull of `SO(3) A u SO(3) B`.
///
/// Wells sharing an eigenvector `v` (eigenvalue `l`) use the characterization
/// `det F = det A`, `F^T F v = l^2 v`, `|F e| <= max(|A e|, |B e|)`; given the
/// second condition the last one reduces to the plane orthogonal to `v`,
/// where it is a comparison of sinusoids checked at its finitely many
/// critical points. Wells related by a single two-fold axis use the
/// Ball-James region of their twin.
pub fn two_well_membership(f: &Mat3, a: &Mat3, b: &Mat3, tol: &Tolerances) -> Result<bool> {
    let scale = a.norm().max(b.norm()).max(1.0);
    let det = a.det();
    if (det - b.det()).abs() > 1e-9 * det.abs().max(1.0) {
        return Err(CofkitError::WellsIncompatible);
    }
    if let Some((v, l)) = shared_eigenvector(a, b, 1e-9)? {
        if (f.det() - det).abs() > tol.membership * det.abs().max(1.0) {
            return Ok(false);
        }
        let c = f.transpose() * *f;
        if (c * v - v * (l * l)).norm() > tol.membership * scale * scale {
            return Ok(false);
        }
        let (w1, w2) = plane_basis(&v);
        let [c0, c1, c2] = planar_form(&c, &w1, &w2);
        let fa = planar_form(&(*a * *a), &w1, &w2);
        let fb = planar_form(&(*b * *b), &w1, &w2);
        let da = [fa[0] - c0, fa[1] - c1, fa[2] - c2];
        let db = [fb[0] - c0, fb[1] - c1, fb[2] - c2];
        return Ok(min_of_max_sinusoids(da, db) >= -tol.membership * scale * scale);
    }
    let axes = twofold_axes(a, b, tol).map_err(|_| CofkitError::WellsIncompatible)?;
    if axes.len() != 1 {
        return Err(CofkitError::WellsIncompatible);
    }
    let (t1, _) = twin_solutions(a, &axes[0])?;
    let region = HullRegion::new(a, &t1.b, &t1.m)?;
    Ok(region.contains(f, tol.membership))
}

/// `n` nearly uniform unit vectors on the Fibonacci lattice.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            Vec3::new(r * t.cos(), r * t.sin(), z)
        })
        .collect()
}

/// Shared-eigenvector membership with the pointwise condition sampled on
/// `samples` directions instead of solved in the plane.
pub fn two_well_membership_sampled(f: &Mat3, a: &Mat3, b: &Mat3, samples: usize, tol: &Tolerances) -> Result<bool> {
    let det = a.det();
    let (v, l) = shared_eigenvector(a, b, 1e-9)?.ok_or(CofkitError::WellsIncompatible)?;
    let scale = a.norm().max(b.norm()).max(1.0);
    if (f.det() - det).abs() > tol.membership * det.abs().max(1.0) {
        return Ok(false);
    }
    let c = f.transpose() * *f;
    if (c * v - v * (l * l)).norm() > tol.membership * scale * scale {
        return Ok(false);
    }
    Ok(fibonacci_sphere(samples).iter().all(|e| {
        (*f * *e).norm_sq() <= (*a * *e).norm_sq().max((*b * *e).norm_sq()) + tol.membership * scale * scale
    }))
}

// ---------------------------------------------------------------------------
// Type I/II families

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub beta: f64,
    pub gamma: f64,
    pub f1: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionScan {
    pub region: HullRegion,
    pub points: Vec<ScanPoint>,
    /// `c0` of the conjugate twin: `det(F^T F - 1) = c0 mu (1 - mu)`.
    pub c0: f64,
    /// Least-squares slope of `g` against `1 - gamma`.
    pub kappa_fit: f64,
    /// `det U^2 c0 (1 + delta^2) / (4 delta^2)`.
    pub kappa_predicted: f64,
    /// `max |g - kappa_fit (1 - gamma)| / max |g|`.
    pub fit_residual: f64,
    /// Largest spread of `g` along a row of fixed `gamma`, relative to `max |g|`.
    pub beta_spread: f64,
    /// Smallest `|g| / (|kappa_predicted| (1 - gamma))` away from `gamma = 1`.
    pub min_ratio: f64,
}

impl RegionScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("beta,gamma,f1,phi\n");
        for p in &self.points {
            let _ = writeln!(s, "{:.12e},{:.12e},{:.12e},{:.12e}", p.beta, p.gamma, p.f1, p.phi);
        }
        s
    }
}

/// Scans `f1` and `phi` on an `n x n` grid of the region, with
/// `alpha = (1 + beta^2) / gamma`, and fits `g = kappa (1 - gamma)`.
pub fn scan_region(u: &Mat3, twin: &TwinSolution, conjugate: &TwinSolution, n: usize) -> Result<RegionScan> {
    let region = HullRegion::new(u, &twin.b, &twin.m)?;
    let n = n.max(2);
    let d2 = region.delta * region.delta;
    let gamma_min = 1.0 / (1.0 + d2);
    let mut points = Vec::with_capacity(n * n);
    let mut rows = Vec::with_capacity(n);
    for gi in 0..n {
        let gamma = gamma_min + (1.0 - gamma_min) * gi as f64 / (n - 1) as f64;
        let bmax = (gamma * (1.0 + d2) - 1.0).max(0.0).sqrt();
        let mut row = Vec::with_capacity(n);
        for bi in 0..n {
            let beta = -bmax + 2.0 * bmax * bi as f64 / (n - 1) as f64;
            let alpha = (1.0 + beta * beta) / gamma;
            let f1 = region.f1(alpha, beta, gamma)?;
            let phi = region.phi(alpha, beta, gamma)?;
            points.push(ScanPoint { beta, gamma, f1, phi });
            row.push(region.g(beta, gamma)?);
        }
        rows.push((gamma, row));
    }
    let fh = *u + conjugate.b.outer(&conjugate.m) * 0.5;
    let c0 = 4.0 * (fh.transpose() * fh - Mat3::identity()).det();
    let kappa_predicted = region.det_u * region.det_u * c0 * (1.0 + d2) / (4.0 * d2);

    let (mut num, mut den, mut gmax) = (0.0, 0.0, 0.0_f64);
    for (gamma, row) in &rows {
        for g in row {
            num += g * (1.0 - gamma);
            den += (1.0 - gamma) * (1.0 - gamma);
            gmax = gmax.max(g.abs());
        }
    }
    let kappa_fit = if den > 0.0 { num / den } else { 0.0 };
    let gmax = gmax.max(f64::MIN_POSITIVE);
    let mut fit_residual: f64 = 0.0;
    let mut beta_spread: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (gamma, row) in &rows {
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        beta_spread = beta_spread.max((hi - lo) / gmax);
        for g in row {
            fit_residual = fit_residual.max((g - kappa_fit * (1.0 - gamma)).abs() / gmax);
            if 1.0 - gamma > 1e-3 * (1.0 - gamma_min) {
                min_ratio = min_ratio.min(g.abs() / (kappa_predicted.abs() * (1.0 - gamma)));
            }
        }
    }
    Ok(RegionScan { region, points, c0, kappa_fit, kappa_predicted, fit_residual, beta_spread, min_ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityFamily {
    pub connections: Vec<IdentityConnection>,
    /// Connections dropped as duplicates of another at the same fraction.
    pub merged: usize,
    pub scan: RegionScan,
}

/// Region scan resolution per axis.
pub const REGION_SCAN_POINTS: usize = 201;

/// The rank-one-to-identity set of the hull of `U` and its twin when the twin
/// satisfies the cofactor conditions and its conjugate fails the second one:
/// the two habit solutions of `U + mu b (x) m` for each fraction.
pub fn type_i_ii_identity_family(
    u: &Mat3,
    twin: &TwinSolution,
    mu_grid: &[f64],
    tol: &Tolerances,
) -> Result<IdentityFamily> {
    if twin.kind == TwinKind::Compound {
        return Err(CofkitError::HypothesisViolated("compound twin given".into()));
    }
    let (t1, t2) = twin_solutions(u, &twin.axis)?;
    let (own, conjugate) = if twin.kind == TwinKind::TypeI { (t1, t2) } else { (t2, t1) };
    let cc = check_cc(u, &own)?;
    let cc_dev = cc.cc1_dev.max(cc.equivalent_dev);
    if cc_dev > tol.cc_gate {
        return Err(CofkitError::HypothesisViolated(format!(
            "twin misses the cofactor conditions by {cc_dev:.3e}"
        )));
    }
    let conj = check_cc(u, &conjugate)?;
    if conj.equivalent_dev <= tol.cc_gate {
        return Err(CofkitError::HypothesisViolated(
            "both twins satisfy the cofactor conditions; the set is two-dimensional".into(),
        ));
    }
    let mut connections: Vec<IdentityConnection> = Vec::new();
    let mut merged = 0;
    for &mu in mu_grid {
        let f = *u + own.b.outer(&own.m) * mu;
        let set = laminate_habit(u, &own, mu, tol)?;
        let start = connections.len();
        for h in set.solutions {
            let dup = connections[start..]
                .iter()
                .any(|c| (c.a.outer(&c.n) - h.a.outer(&h.n)).norm() <= 1e-10);
            if dup {
                merged += 1;
                continue;
            }
            connections.push(IdentityConnection {
                a: h.a,
                n: h.n,
                rotation: h.rotation,
                well: None,
                mu: Some(mu),
                residual: h.residual(&f),
            });
        }
    }
    let scan = scan_region(u, &own, &conjugate, REGION_SCAN_POINTS)?;
    Ok(IdentityFamily { connections, merged, scan })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_minimum() {
        // max(cos t, -cos t) = |cos t| has minimum 0.
        assert!(min_of_max_sinusoids([0.0, 1.0, 0.0], [0.0, -1.0, 0.0]).abs() < 1e-15);
        assert!((min_of_max_sinusoids([1.0, 0.5, 0.0], [2.0, 0.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        let pts = fibonacci_sphere(100);
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn wells_belong_to_hull() {
        let a = Mat3::new([[1.03, 0.02, 0.0], [0.02, 0.97, 0.0], [0.0, 0.0, 0.95]]);
        let b = Mat3::new([[1.03, -0.02, 0.0], [-0.02, 0.97, 0.0], [0.0, 0.0, 0.95]]);
        let tol = Tolerances::default();
        assert!(two_well_membership(&a, &a, &b, &tol).unwrap());
        assert!(two_well_membership(&b, &a, &b, &tol).unwrap());
        assert!(!two_well_membership(&(a * 1.1), &a, &b, &tol).unwrap());
    }
}
