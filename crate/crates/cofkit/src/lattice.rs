//! Martensitic variants of the cubic parent and their twin-system tables.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};
use crate::linalg3::{eig_sym3, rotation_axis_angle, Mat3, Vec3};
use crate::tolerances::Tolerances;

/// Stretch parameters of `U_1 = [[a, b, 0], [b, c, 0], [0, 0, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoclinicParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Stretch parameters of `U_1 = [[a, b, 0], [b, a, 0], [0, 0, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthorhombicParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrystalSystem {
    Monoclinic,
    Orthorhombic,
}

/// Generic parameters used to fix the combinatorics of the twin tables.
const MONO_REFERENCE: MonoclinicParams = MonoclinicParams { a: 1.03, b: 0.021, c: 0.97, d: 0.95 };
const ORTHO_REFERENCE: OrthorhombicParams = OrthorhombicParams { a: 1.03, b: 0.021, d: 0.95 };

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CofkitError::NotPositiveDefinite(format!("{name} = {v} must be positive")))
    }
}

impl MonoclinicParams {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_positive("c", self.c)?;
        check_positive("d", self.d)?;
        if !self.b.is_finite() || self.b < 0.0 {
            return Err(CofkitError::InvalidInput(format!(
                "b = {} must be finite and non-negative",
                self.b
            )));
        }
        let det = self.a * self.c - self.b * self.b;
        if det <= 0.0 {
            return Err(CofkitError::NotPositiveDefinite(format!(
                "ac - b^2 = {det:.6e} must be positive"
            )));
        }
        Ok(())
    }

    pub fn u1(&self) -> Mat3 {
        let MonoclinicParams { a, b, c, d } = *self;
        Mat3::new([[a, b, 0.0], [b, c, 0.0], [0.0, 0.0, d]])
    }

    /// Reads the parameters back from a matrix with the `U_1` zero pattern.
    pub fn from_u1(u: &Mat3) -> Result<Self> {
        let pattern = [u[(0, 2)], u[(2, 0)], u[(1, 2)], u[(2, 1)], u[(0, 1)] - u[(1, 0)]];
        if pattern.iter().any(|x| x.abs() > 1e-12 * u.norm().max(1.0)) {
            return Err(CofkitError::InvalidInput(
                "matrix does not have the monoclinic U_1 zero pattern".into(),
            ));
        }
        let p = Self::new(u[(0, 0)], u[(0, 1)], u[(1, 1)], u[(2, 2)]);
        p.validate()?;
        Ok(p)
    }

    /// Non-generic features as human-readable warnings.
    pub fn degeneracy_warnings(&self, tol: &Tolerances) -> Vec<String> {
        let mut w = Vec::new();
        if (self.a - self.c).abs() <= tol.generic {
            w.push(format!("non-generic parameters: |a - c| = {:.3e}", (self.a - self.c).abs()));
        }
        if self.b.abs() <= tol.generic {
            w.push(format!("non-generic parameters: |b| = {:.3e}", self.b.abs()));
        }
        if (self.d - 1.0).abs() <= tol.generic {
            w.push(format!("non-generic parameters: |d - 1| = {:.3e}", (self.d - 1.0).abs()));
        }
        w
    }

    /// Eigenvalues of the `(a, b, c)` block, ascending.
    pub fn block_eigenvalues(&self) -> (f64, f64) {
        let t = self.a + self.c;
        let disc = ((self.a - self.c).powi(2) + 4.0 * self.b * self.b).sqrt();
        let hi = 0.5 * (t + disc);
        // Product form keeps the small root accurate.
        let lo = (self.a * self.c - self.b * self.b) / hi;
        (lo, hi)
    }
}

impl OrthorhombicParams {
    pub const fn new(a: f64, b: f64, d: f64) -> Self {
        Self { a, b, d }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_positive("d", self.d)?;
        if !self.b.is_finite() || self.b < 0.0 {
            return Err(CofkitError::InvalidInput(format!(
                "b = {} must be finite and non-negative",
                self.b
            )));
        }
        if self.a <= self.b {
            return Err(CofkitError::NotPositiveDefinite(format!(
                "a = {} must exceed |b| = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn as_monoclinic(&self) -> MonoclinicParams {
        MonoclinicParams::new(self.a, self.b, self.a, self.d)
    }

    pub fn degeneracy_warnings(&self, tol: &Tolerances) -> Vec<String> {
        let mut w = Vec::new();
        if self.b.abs() <= tol.generic {
            w.push(format!("non-generic parameters: |b| = {:.3e}", self.b.abs()));
        }
        if (self.d - 1.0).abs() <= tol.generic {
            w.push(format!("non-generic parameters: |d - 1| = {:.3e}", (self.d - 1.0).abs()));
        }
        w
    }
}

/// Ordered variants of one crystal system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSet {
    pub system: CrystalSystem,
    pub variants: Vec<Mat3>,
}

/// Coordinate planes `(p, q)` carrying the off-diagonal entry, with the
/// remaining axis holding `d`.
const PLANES: [(usize, usize, usize); 3] = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];

fn planar(p: usize, q: usize, r: usize, x: f64, y: f64, z: f64, d: f64) -> Mat3 {
    let mut m = Mat3::zero();
    m[(p, p)] = x;
    m[(q, q)] = z;
    m[(p, q)] = y;
    m[(q, p)] = y;
    m[(r, r)] = d;
    m
}

pub fn monoclinic_variants(p: &MonoclinicParams) -> Result<VariantSet> {
    p.validate()?;
    let MonoclinicParams { a, b, c, d } = *p;
    let mut variants = Vec::with_capacity(12);
    for &(i, j, k) in &PLANES {
        for (x, y, z) in [(a, b, c), (a, -b, c), (c, b, a), (c, -b, a)] {
            variants.push(planar(i, j, k, x, y, z, d));
        }
    }
    Ok(VariantSet { system: CrystalSystem::Monoclinic, variants })
}

pub fn orthorhombic_variants(p: &OrthorhombicParams) -> Result<VariantSet> {
    p.validate()?;
    let OrthorhombicParams { a, b, d } = *p;
    let mut variants = Vec::with_capacity(6);
    for &(i, j, k) in &PLANES {
        for (x, y) in [(a, b), (a, -b)] {
            variants.push(planar(i, j, k, x, y, x, d));
        }
    }
    Ok(VariantSet { system: CrystalSystem::Orthorhombic, variants })
}

impl VariantSet {
    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    /// Variant `i`, 1-based as in the tables.
    pub fn get(&self, i: usize) -> &Mat3 {
        &self.variants[i - 1]
    }

    /// 1-based index of the first variant equal to `m` within `tol` (relative).
    pub fn index_of(&self, m: &Mat3, tol: f64) -> Option<usize> {
        self.variants
            .iter()
            .position(|v| (*v - *m).norm() <= tol * v.norm().max(1.0))
            .map(|k| k + 1)
    }

    /// Conjugation action of `q` as a 1-based permutation (`None` if not closed).
    pub fn permutation(&self, q: &Mat3) -> Option<Vec<usize>> {
        self.variants
            .iter()
            .map(|v| self.index_of(&(*q * *v * q.transpose()), 1e-12))
            .collect()
    }

    /// Eigenvalues shared by all variants.
    pub fn eigenvalues(&self) -> Result<[f64; 3]> {
        Ok(eig_sym3(&self.variants[0])?.values)
    }

    fn reference(system: CrystalSystem) -> VariantSet {
        match system {
            CrystalSystem::Monoclinic => monoclinic_variants(&MONO_REFERENCE),
            CrystalSystem::Orthorhombic => orthorhombic_variants(&ORTHO_REFERENCE),
        }
        .expect("reference parameters are valid")
    }
}

/// The 24 proper rotations of the cube: signed permutation matrices with
/// determinant one. The identity comes first.
pub fn cubic_symmetry_group() -> Vec<Mat3> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8u32 {
            let mut m = Mat3::zero();
            for (i, &col) in perm.iter().enumerate() {
                m[(i, col)] = if signs & (1 << i) == 0 { 1.0 } else { -1.0 };
            }
            if m.det() > 0.0 {
                out.push(m);
            }
        }
    }
    out
}

/// Column of a twin table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TwinColumn {
    /// Type I/II twins, orbit of (1,12).
    A,
    /// Type I/II twins, orbit of (3,10).
    B,
    /// Compound twins, orbit of (1,2).
    CUpper,
    /// Compound twins, orbit of (1,3).
    CLower,
    /// Generic non-conventional compound twins, orbit of (1,4).
    CShaded,
    /// Orthorhombic type I/II twins.
    TypeOneTwo,
    /// Orthorhombic compound twins.
    Compound,
}

impl TwinColumn {
    pub fn is_compound(self) -> bool {
        matches!(self, Self::CUpper | Self::CLower | Self::CShaded | Self::Compound)
    }

    pub fn is_non_conventional(self) -> bool {
        self == Self::CShaded
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::CUpper => "C-upper",
            Self::CLower => "C-lower",
            Self::CShaded => "C-non-conventional",
            Self::TypeOneTwo => "I/II",
            Self::Compound => "compound",
        }
    }

    /// Orbit representative pair.
    fn representative(self) -> (usize, usize) {
        match self {
            Self::A => (1, 12),
            Self::B => (3, 10),
            Self::CUpper => (1, 2),
            Self::CLower => (1, 3),
            Self::CShaded => (1, 4),
            Self::TypeOneTwo => (1, 6),
            Self::Compound => (1, 2),
        }
    }

    fn for_system(system: CrystalSystem) -> &'static [TwinColumn] {
        match system {
            CrystalSystem::Monoclinic => &[Self::A, Self::B, Self::CUpper, Self::CLower, Self::CShaded],
            CrystalSystem::Orthorhombic => &[Self::TypeOneTwo, Self::Compound],
        }
    }
}

/// A rotation `R(angle, axis)` with `U_j = R U_i R^T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRotation {
    pub axis: [i32; 3],
    /// Multiple of pi: 1.0, 0.5 or -0.5.
    pub angle_over_pi: f64,
}

impl TableRotation {
    pub fn matrix(&self) -> Mat3 {
        let axis = Vec3::new(self.axis[0] as f64, self.axis[1] as f64, self.axis[2] as f64);
        let r = rotation_axis_angle(axis, self.angle_over_pi * PI).expect("nonzero table axis");
        // Table rotations are signed permutations; snap the round-off.
        let mut s = r;
        s.0.iter_mut().flatten().for_each(|x| *x = x.round());
        s
    }

    pub fn angle(&self) -> f64 {
        self.angle_over_pi * PI
    }

    pub fn label(&self) -> String {
        let ang = match self.angle_over_pi {
            x if x == 1.0 => "pi".to_string(),
            x if x == 0.5 => "pi/2".to_string(),
            x if x == -0.5 => "-pi/2".to_string(),
            x => format!("{x}pi"),
        };
        format!("{ang},({},{},{})", self.axis[0], self.axis[1], self.axis[2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinCell {
    pub column: TwinColumn,
    pub non_conventional: bool,
    /// 1-based pairs `(i, j)` with `i < j`, ascending.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinRow {
    pub rotation: TableRotation,
    pub cells: Vec<TwinCell>,
}

/// One (pair, rotation, column) entry of a twin table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinSystemEntry {
    pub pair: (usize, usize),
    pub rotation: TableRotation,
    pub column: TwinColumn,
    pub non_conventional: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinTable {
    pub system: CrystalSystem,
    pub rows: Vec<TwinRow>,
    pub warnings: Vec<String>,
}

impl TwinTable {
    pub fn entries(&self) -> Vec<TwinSystemEntry> {
        let mut out = Vec::new();
        for row in &self.rows {
            for cell in &row.cells {
                for &pair in &cell.pairs {
                    out.push(TwinSystemEntry {
                        pair,
                        rotation: row.rotation,
                        column: cell.column,
                        non_conventional: cell.non_conventional,
                    });
                }
            }
        }
        out
    }

    /// The cell of `column` in the row of `rotation`, if any.
    pub fn cell(&self, rotation_label: &str, column: TwinColumn) -> Vec<&TwinCell> {
        self.rows
            .iter()
            .filter(|r| r.rotation.label() == rotation_label)
            .flat_map(|r| r.cells.iter().filter(move |c| c.column == column))
            .collect()
    }
}

const HALF_TURN_AXES: [[i32; 3]; 9] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 0, -1],
    [1, 1, 0],
    [1, -1, 0],
    [0, 1, 1],
    [0, -1, 1],
];

const QUARTER_TURN_AXES: [[i32; 3]; 3] = [[0, 1, 0], [0, 0, 1], [1, 0, 0]];

fn sorted_pair(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// All pairs `{sigma(i), sigma(j)}` over the cubic group.
pub fn pair_orbit(vs: &VariantSet, pair: (usize, usize)) -> BTreeSet<(usize, usize)> {
    cubic_symmetry_group()
        .iter()
        .filter_map(|q| vs.permutation(q))
        .map(|s| sorted_pair(s[pair.0 - 1], s[pair.1 - 1]))
        .collect()
}

/// Table column a pair belongs to, from its symmetry orbit.
/// `None` for pairs that are not twin-related.
pub fn column_of_pair(system: CrystalSystem, pair: (usize, usize)) -> Option<TwinColumn> {
    let reference = VariantSet::reference(system);
    let p = sorted_pair(pair.0, pair.1);
    TwinColumn::for_system(system)
        .iter()
        .copied()
        .find(|col| pair_orbit(&reference, col.representative()).contains(&p))
}

/// Twin-system table. Rows follow the conventional order: half turns about
/// the nine axes, then quarter turns of both senses about y, z and x. In the
/// monoclinic case each coordinate-axis half turn is split in two rows by the
/// diagonal entry the variants carry along that axis.
pub fn twin_table(vs: &VariantSet, tol: &Tolerances) -> TwinTable {
    let reference = VariantSet::reference(vs.system);
    let columns: Vec<(TwinColumn, BTreeSet<(usize, usize)>)> = TwinColumn::for_system(vs.system)
        .iter()
        .map(|&c| (c, pair_orbit(&reference, c.representative())))
        .collect();

    let mut specs: Vec<TableRotation> = HALF_TURN_AXES
        .iter()
        .map(|&axis| TableRotation { axis, angle_over_pi: 1.0 })
        .collect();
    if vs.system == CrystalSystem::Monoclinic {
        for axis in QUARTER_TURN_AXES {
            for angle_over_pi in [0.5, -0.5] {
                specs.push(TableRotation { axis, angle_over_pi });
            }
        }
    }

    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for rotation in specs {
        let sigma = reference
            .permutation(&rotation.matrix())
            .expect("cubic rotations permute the variants");
        let pairs: Vec<(usize, usize)> = (1..=sigma.len())
            .filter(|&i| i < sigma[i - 1])
            .map(|i| (i, sigma[i - 1]))
            .collect();

        let axis_index = rotation.axis.iter().filter(|&&x| x != 0).count() == 1;
        let groups: Vec<Vec<(usize, usize)>> =
            if vs.system == CrystalSystem::Monoclinic && rotation.angle_over_pi == 1.0 && axis_index {
                let k = rotation.axis.iter().position(|&x| x != 0).unwrap_or(0);
                let key = |p: &(usize, usize)| reference.get(p.0)[(k, k)];
                let first = key(&pairs[0]);
                let (g1, g2): (Vec<_>, Vec<_>) =
                    pairs.iter().partition(|p| (key(p) - first).abs() < 1e-12);
                vec![g1, g2]
            } else {
                vec![pairs]
            };

        for group in groups {
            let mut cells = Vec::new();
            for (column, orbit) in &columns {
                let mut cell_pairs: Vec<(usize, usize)> = group
                    .iter()
                    .copied()
                    .filter(|p| orbit.contains(p))
                    .filter(|&(i, j)| {
                        let (ui, uj) = (vs.get(i), vs.get(j));
                        (*ui - *uj).norm() > 1e-12 * ui.norm().max(1.0)
                    })
                    .collect();
                cell_pairs.sort_unstable();
                if !cell_pairs.is_empty() {
                    cells.push(TwinCell {
                        column: *column,
                        non_conventional: column.is_non_conventional(),
                        pairs: cell_pairs,
                    });
                }
            }
            if !cells.is_empty() {
                rows.push(TwinRow { rotation, cells });
            }
        }
    }

    let distinct = {
        let mut d: Vec<&Mat3> = Vec::new();
        for v in &vs.variants {
            if !d.iter().any(|w| (**w - *v).norm() <= 1e-12 * v.norm().max(1.0)) {
                d.push(v);
            }
        }
        d.len()
    };
    if distinct < vs.len() {
        warnings.push(format!(
            "degenerate variant set: only {distinct} of {} variants are distinct",
            vs.len()
        ));
    }
    if distinct == 1 {
        warnings.push("degenerate identity-like input: no twins exist".into());
    }
    if let Ok(p) = MonoclinicParams::from_u1(&vs.variants[0]) {
        let mut w = p.degeneracy_warnings(tol);
        if vs.system == CrystalSystem::Orthorhombic {
            w.retain(|x| !x.contains("|a - c|"));
        }
        warnings.extend(w);
    }
    TwinTable { system: vs.system, rows, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zn() -> MonoclinicParams {
        MonoclinicParams::new(1.0015, 0.0073, 1.0591, 0.9363)
    }

    #[test]
    fn group_is_closed() {
        let g = cubic_symmetry_group();
        assert_eq!(g.len(), 24);
        assert_eq!(g[0], Mat3::identity());
        for p in &g {
            for q in &g {
                let r = *p * *q;
                assert!(g.iter().any(|s| *s == r));
            }
        }
    }

    #[test]
    fn zn_u1_matches() {
        let vs = monoclinic_variants(&zn()).unwrap();
        assert_eq!(
            vs.variants[0],
            Mat3::new([[1.0015, 0.0073, 0.0], [0.0073, 1.0591, 0.0], [0.0, 0.0, 0.9363]])
        );
        let s = Mat3::diag(1.0, -1.0, 1.0);
        assert_eq!(vs.variants[1], s * vs.variants[0] * s);
        assert_eq!(vs.get(11), &Mat3::new([[0.9363, 0.0, 0.0], [0.0, 1.0591, 0.0073], [0.0, 0.0073, 1.0015]]));
    }

    #[test]
    fn ortho_layout() {
        let vs = orthorhombic_variants(&OrthorhombicParams::new(1.02, 0.03, 0.97)).unwrap();
        assert_eq!(vs.variants[0], MonoclinicParams::new(1.02, 0.03, 1.02, 0.97).u1());
        assert_eq!(vs.get(5)[(1, 1)], 1.02);
        assert_eq!(vs.get(5)[(0, 0)], 0.97);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(monoclinic_variants(&MonoclinicParams::new(1.0, 1.5, 1.0, 1.0)).is_err());
        assert!(monoclinic_variants(&MonoclinicParams::new(-1.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn column_lookup() {
        assert_eq!(column_of_pair(CrystalSystem::Monoclinic, (1, 5)), Some(TwinColumn::B));
        assert_eq!(column_of_pair(CrystalSystem::Monoclinic, (11, 1)), Some(TwinColumn::A));
        assert_eq!(column_of_pair(CrystalSystem::Monoclinic, (1, 7)), None);
    }
}
