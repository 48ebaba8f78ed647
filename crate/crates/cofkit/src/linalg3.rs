//! Fixed-size 3-vectors and 3x3 matrices with the handful of decompositions the
//! crystallography needs: a cyclic Jacobi symmetric eigensolver, a one-sided
//! Jacobi SVD, polar decomposition, cofactors and axis-angle rotations.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};
use crate::tolerances::{JACOBI_MAX_SWEEPS, JACOBI_THRESHOLD, SIGN_ZERO_TOL, SYMMETRY_TOL};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub const fn zero() -> Self {
        Self([0.0; 3])
    }

    /// Unit vector along coordinate axis `i`.
    pub fn unit(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vec3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn outer(&self, o: &Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i] * o.0[j];
            }
        }
        Mat3(m)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Flips the vector so its first non-negligible component is positive.
    /// Returns the normalized vector and whether it was flipped.
    pub fn sign_normalized(&self) -> (Vec3, bool) {
        let scale = self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for x in self.0 {
            if x.abs() > SIGN_ZERO_TOL * scale.max(1e-300) {
                return if x < 0.0 { (-*self, true) } else { (*self, false) };
            }
        }
        (*self, false)
    }

    /// Angle between two lines (sign-insensitive), in radians.
    pub fn line_angle(&self, o: &Vec3) -> f64 {
        let c = self.cross(o).norm();
        let d = self.dot(o).abs();
        c.atan2(d)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Mat3 {
    pub const fn new(rows: [[f64; 3]; 3]) -> Self {
        Self(rows)
    }

    pub const fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Self([
            [c0[0], c1[0], c2[0]],
            [c0[1], c1[1], c2[1]],
            [c0[2], c1[2], c2[2]],
        ])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Cofactor matrix: `cof(M)^T M = det(M) 1`.
    pub fn cofactor(&self) -> Mat3 {
        let m = &self.0;
        let mut c = [[0.0; 3]; 3];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                *x = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
            }
        }
        Mat3(c)
    }

    pub fn inverse(&self) -> Option<Mat3> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(self.cofactor().transpose() * (1.0 / det))
    }

    pub fn symmetric_part(&self) -> Mat3 {
        (*self + self.transpose()) * 0.5
    }

    pub fn asymmetry(&self) -> f64 {
        (*self - self.transpose()).norm()
    }

    /// `|R^T R - 1| + |det R - 1|`; zero for a proper rotation.
    pub fn rotation_defect(&self) -> f64 {
        (self.transpose() * *self - Mat3::identity()).norm() + (self.det() - 1.0).abs()
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = self;
        r.0.iter_mut().flatten().for_each(|x| *x *= s);
        r
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, m: Mat3) -> Mat3 {
        m * self
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3([self.row(0).dot(&v), self.row(1).dot(&v), self.row(2).dot(&v)])
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(r)
    }
}

/// Free-function form of [`Mat3::cofactor`].
pub fn cofactor_matrix(m: &Mat3) -> Mat3 {
    m.cofactor()
}

/// Proper rotation by `angle` radians about `axis` (Rodrigues).
pub fn rotation_axis_angle(axis: Vec3, angle: f64) -> Result<Mat3> {
    let u = axis.normalized().ok_or(CofkitError::ZeroAxis)?;
    let (s, c) = angle.sin_cos();
    let k = Mat3([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]]);
    Ok(Mat3::identity() * c + k * s + u.outer(&u) * (1.0 - c))
}

/// Axis (unit, sign-normalized) and angle in `[0, pi]` of a proper rotation.
/// The identity returns the x axis with angle zero.
pub fn axis_angle_of(r: &Mat3) -> (Vec3, f64) {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let skew = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let s = 0.5 * skew.norm();
    let angle = s.atan2(c);
    if angle < 1e-12 {
        return (Vec3::unit(0), 0.0);
    }
    if s > 1e-6 {
        return (skew * (1.0 / skew.norm()), angle);
    }
    // Near a half turn: the axis is the dominant column of (R + 1) / 2.
    let p = (*r + Mat3::identity()) * 0.5;
    let k = (0..3)
        .max_by(|&i, &j| p.col(i).norm().total_cmp(&p.col(j).norm()))
        .unwrap_or(0);
    let axis = p.col(k).normalized().unwrap_or(Vec3::unit(0));
    (axis.sign_normalized().0, angle)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymEig3 {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

impl SymEig3 {
    pub fn reconstruct(&self) -> Mat3 {
        (0..3).fold(Mat3::zero(), |acc, i| {
            acc + self.vectors[i].outer(&self.vectors[i]) * self.values[i]
        })
    }

    /// Matrix whose columns are the eigenvectors.
    pub fn basis(&self) -> Mat3 {
        Mat3::from_cols(self.vectors[0], self.vectors[1], self.vectors[2])
    }
}

/// Flips `v` so that its largest-magnitude component is positive.
fn canonical_sign(v: Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() * (1.0 + 1e-12) {
            k = i;
        }
    }
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eig_sym3(m: &Mat3) -> Result<SymEig3> {
    let scale = m.norm();
    let asymmetry = m.asymmetry();
    if !m.is_finite() || asymmetry > SYMMETRY_TOL * scale.max(1.0) {
        return Err(CofkitError::NonSymmetric { asymmetry });
    }
    let mut a = m.symmetric_part();
    let mut v = Mat3::identity();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2)).sqrt();
        if off <= JACOBI_THRESHOLD * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[(k, p)], a[(k, q)]);
                a[(k, p)] = c * akp - s * akq;
                a[(k, q)] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                a[(p, k)] = c * apk - s * aqk;
                a[(q, k)] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                v[(k, p)] = c * vkp - s * vkq;
                v[(k, q)] = s * vkp + c * vkq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    Ok(SymEig3 {
        values: order.map(|i| a[(i, i)]),
        vectors: order.map(|i| canonical_sign(v.col(i))),
    })
}

/// Singular values of a column-stored matrix by one-sided (Hestenes) Jacobi.
/// Columns are orthogonalized in place; `v` accumulates the right rotations.
fn hestenes(cols: &mut [Vec<f64>], mut v: Option<&mut Vec<Vec<f64>>>) {
    let n = cols.len();
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = cols[i].iter().map(|x| x * x).sum();
                let beta: f64 = cols[j].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(j);
                for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
                if let Some(v) = v.as_deref_mut() {
                    let (lo, hi) = v.split_at_mut(j);
                    for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                        let (xi, yj) = (*x, *y);
                        *x = c * xi - s * yj;
                        *y = s * xi + c * yj;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Singular values (descending) of the matrix whose columns are given.
pub fn singular_values_of_columns(columns: &[Vec<f64>]) -> Vec<f64> {
    let mut cols = columns.to_vec();
    hestenes(&mut cols, None);
    let mut s: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `M = U diag(sigma) V^T` with `sigma` descending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: [f64; 3],
    pub v: Mat3,
}

pub fn svd3(m: &Mat3) -> Svd3 {
    let mut cols: Vec<Vec<f64>> = (0..3).map(|j| m.col(j).0.to_vec()).collect();
    let mut vcols: Vec<Vec<f64>> = (0..3).map(|j| Vec3::unit(j).0.to_vec()).collect();
    hestenes(&mut cols, Some(&mut vcols));
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma = order.map(|i| norms[i]);
    let vv = order.map(|i| Vec3([vcols[i][0], vcols[i][1], vcols[i][2]]));
    let top = sigma[0].max(f64::MIN_POSITIVE);
    let mut uu = [Vec3::zero(); 3];
    let mut filled = [false; 3];
    for k in 0..3 {
        let c = &cols[order[k]];
        if sigma[k] > 1e-300 && sigma[k] > 1e-15 * top {
            uu[k] = Vec3([c[0], c[1], c[2]]) * (1.0 / sigma[k]);
            filled[k] = true;
        }
    }
    // Complete U for (numerically) rank-deficient input.
    for k in 0..3 {
        if filled[k] {
            continue;
        }
        let others: Vec<Vec3> = (0..3).filter(|&i| filled[i]).map(|i| uu[i]).collect();
        uu[k] = match others.len() {
            2 => others[0].cross(&others[1]),
            _ => {
                let seed = others.first().copied();
                let mut best = Vec3::unit(0);
                for e in 0..3 {
                    let mut cand = Vec3::unit(e);
                    if let Some(s) = seed {
                        cand = cand - s * s.dot(&cand);
                    }
                    if cand.norm() > best.norm() || seed.is_none() {
                        best = cand;
                    }
                    if seed.is_none() {
                        break;
                    }
                }
                best.normalized().unwrap_or(Vec3::unit(k))
            }
        };
        filled[k] = true;
    }
    Svd3 {
        u: Mat3::from_cols(uu[0], uu[1], uu[2]),
        sigma,
        v: Mat3::from_cols(vv[0], vv[1], vv[2]),
    }
}

/// `F = R S` with `R` proper orthogonal and `S` symmetric positive definite.
pub fn polar(f: &Mat3) -> Result<(Mat3, Mat3)> {
    if !(f.det() > 0.0) {
        return Err(CofkitError::SingularGradient);
    }
    let s = svd3(f);
    let r = s.u * s.v.transpose();
    let st = s.v * Mat3::diag(s.sigma[0], s.sigma[1], s.sigma[2]) * s.v.transpose();
    Ok((r, st.symmetric_part()))
}

/// Second-largest singular value: the rank-one defect of a matrix.
pub fn second_singular_value(m: &Mat3) -> f64 {
    svd3(m).sigma[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (*a - *b).norm() <= tol
    }

    #[test]
    fn identity_eigs() {
        let e = eig_sym3(&Mat3::identity()).unwrap();
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
        assert!(close(&e.basis(), &Mat3::identity(), 0.0));
    }

    #[test]
    fn diagonal_eigs() {
        let e = eig_sym3(&Mat3::diag(1.06, 0.9363, 1.0)).unwrap();
        assert_eq!(e.values, [0.9363, 1.0, 1.06]);
    }

    #[test]
    fn zn_block_middle_eigenvalue() {
        let m = Mat3::new([[1.0015, 0.0073, 0.0], [0.0073, 1.0591, 0.0], [0.0, 0.0, 0.9363]]);
        let e = eig_sym3(&m).unwrap();
        // Quadratic formula on the 2x2 block.
        let (t, d): (f64, f64) = (1.0015 + 1.0591, 1.0015 * 1.0591 - 0.0073 * 0.0073);
        let lo = 0.5 * (t - (t * t - 4.0 * d).sqrt());
        assert!((e.values[1] - lo).abs() < 1e-14);
        assert!((e.values[1] - 1.00057).abs() < 5e-5);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let m = Mat3::new([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(eig_sym3(&m), Err(CofkitError::NonSymmetric { .. })));
    }

    #[test]
    fn sign_convention() {
        let m = Mat3::new([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]);
        let e = eig_sym3(&m).unwrap();
        for v in e.vectors {
            let k = (0..3).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap();
            assert!(v[k] > 0.0);
        }
        assert!(close(&e.reconstruct(), &m, 1e-12 * m.norm()));
    }

    #[test]
    fn rotation_examples() {
        let r = rotation_axis_angle(Vec3::new(0.0, 0.0, 1.0), PI).unwrap();
        assert!(close(&r, &Mat3::diag(-1.0, -1.0, 1.0), 1e-15));
        let r = rotation_axis_angle(Vec3::new(1.0, 0.0, 0.0), FRAC_PI_2).unwrap();
        assert!((r * Vec3::new(0.0, 1.0, 0.0) - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        let e = Vec3::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let r = rotation_axis_angle(e, PI).unwrap();
        assert!(close(&r, &(e.outer(&e) * 2.0 - Mat3::identity()), 1e-14));
        assert_eq!(rotation_axis_angle(Vec3::zero(), 1.0), Err(CofkitError::ZeroAxis));
    }

    #[test]
    fn axis_angle_round_trip() {
        for (axis, angle) in [
            (Vec3::new(1.0, 2.0, -0.5), 0.3),
            (Vec3::new(0.0, 1.0, 1.0), PI),
            (Vec3::new(0.0, 1.0, 0.0), FRAC_PI_2),
        ] {
            let r = rotation_axis_angle(axis, angle).unwrap();
            let (u, t) = axis_angle_of(&r);
            assert!((t - angle).abs() < 1e-12);
            assert!(u.cross(&axis.normalized().unwrap()).norm() < 1e-12);
            assert!((rotation_axis_angle(u, t).unwrap() - r).norm() < 1e-12);
        }
    }

    #[test]
    fn cofactor_examples() {
        assert_eq!(Mat3::identity().cofactor(), Mat3::identity());
        assert_eq!(Mat3::diag(2.0, 3.0, 4.0).cofactor(), Mat3::diag(12.0, 8.0, 6.0));
    }

    #[test]
    fn svd_rank_one() {
        let a = Vec3::new(0.3, -0.2, 0.9);
        let b = Vec3::new(1.0, 2.0, -0.5);
        let s = svd3(&a.outer(&b));
        assert!((s.sigma[0] - a.norm() * b.norm()).abs() < 1e-14);
        assert!(s.sigma[1] < 1e-16 && s.sigma[2] < 1e-16);
    }

    #[test]
    fn svd_reconstructs() {
        let m = Mat3::new([[1.0, 0.2, -0.3], [0.5, 0.9, 0.1], [-0.2, 0.4, 1.3]]);
        let s = svd3(&m);
        let rec = s.u * Mat3::diag(s.sigma[0], s.sigma[1], s.sigma[2]) * s.v.transpose();
        assert!(close(&rec, &m, 1e-14));
        assert!(s.u.rotation_defect() < 1e-13 || (s.u.det() + 1.0).abs() < 1e-13);
    }

    #[test]
    fn polar_of_rotated_stretch() {
        let r = rotation_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7).unwrap();
        let u = Mat3::new([[1.1, 0.05, 0.0], [0.05, 0.95, 0.02], [0.0, 0.02, 1.03]]);
        let (rr, uu) = polar(&(r * u)).unwrap();
        assert!(close(&rr, &r, 1e-13));
        assert!(close(&uu, &u, 1e-13));
    }
}
