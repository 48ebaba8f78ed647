//! End-to-end analysis of one stretch tensor and its serialized report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cofactor::{
    check_cc, cofactor_summary, compound_triple_junction, CofactorReport, CofactorSummary,
    CompoundJunctionReport, CompoundOrbit, JunctionMatrix,
};
use crate::error::{CofkitError, Result};
use crate::lattice::{
    column_of_pair, monoclinic_variants, orthorhombic_variants, twin_table, CrystalSystem,
    MonoclinicParams, OrthorhombicParams, TwinColumn, TwinTable, VariantSet,
};
use crate::linalg3::Mat3;
use crate::qchull::{compound_identity_connections, type_i_ii_identity_family};
use crate::startwin::{star_classify, StarReport};
use crate::tolerances::Tolerances;
use crate::twinning::{classify_pair, pair_twins, PairClass, TwinKind, TwinSolution};

pub const SCHEMA_VERSION: &str = "cofkit.analysis/1";
/// Significant digits kept in serialized reports.
pub const REPORT_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    /// Preset name, file path or `inline`.
    pub source: String,
    pub system: CrystalSystem,
    pub params: MonoclinicParams,
    pub matrix: Mat3,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub count: usize,
    pub eigenvalues: [f64; 3],
    pub variants: Vec<Mat3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub pair: (usize, usize),
    pub class: PairClass,
    pub column: Option<TwinColumn>,
    pub twins: Vec<TwinSolution>,
    pub cofactor: Vec<CofactorReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarEntry {
    pub pair: (usize, usize),
    pub kind: TwinKind,
    pub report: Option<StarReport>,
    /// Why classification was skipped.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullFinding {
    pub pair: (usize, usize),
    pub kind: TwinKind,
    pub connections: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub input: InputEcho,
    pub variants: VariantSummary,
    pub twin_table: TwinTable,
    pub pairs: Vec<PairAnalysis>,
    /// Best metrics over the pairs `(1, j)`; absent without type I/II twins.
    pub summary: Option<CofactorSummary>,
    pub junctions: Vec<CompoundJunctionReport>,
    pub stars: Vec<StarEntry>,
    pub hull: Vec<HullFinding>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Classify star twins even when the cofactor gate fails.
    pub force: bool,
}

/// Fractions used for the type I/II identity families.
const FAMILY_GRID: usize = 11;

fn variant_set(system: CrystalSystem, p: &MonoclinicParams) -> Result<VariantSet> {
    match system {
        CrystalSystem::Monoclinic => monoclinic_variants(p),
        CrystalSystem::Orthorhombic => {
            if (p.a - p.c).abs() > 0.0 {
                return Err(CofkitError::InvalidInput("orthorhombic input needs a = c".into()));
            }
            orthorhombic_variants(&OrthorhombicParams::new(p.a, p.b, p.d))
        }
    }
}

/// Runs the full pipeline on one stretch tensor.
pub fn analyze(
    source: &str,
    system: CrystalSystem,
    p: &MonoclinicParams,
    opts: AnalyzeOptions,
    tol: &Tolerances,
) -> Result<AnalysisReport> {
    p.validate()?;
    let vs = variant_set(system, p)?;
    let table = twin_table(&vs, tol);
    let mut warnings = table.warnings.clone();
    let u = *vs.get(1);

    let mut pairs = Vec::new();
    for j in 2..=vs.len() {
        let v = *vs.get(j);
        if (u - v).norm() <= 1e-12 * u.norm() {
            continue;
        }
        let class = classify_pair(&u, &v, tol);
        let twins = match pair_twins(&u, &v, tol) {
            Ok(t) => t,
            Err(CofkitError::NoTwoFoldAxis | CofkitError::IdenticalVariants) => Vec::new(),
            Err(e) => return Err(e),
        };
        let cofactor = twins.iter().map(|t| check_cc(&u, t)).collect::<Result<Vec<_>>>()?;
        pairs.push(PairAnalysis { pair: (1, j), class, column: column_of_pair(system, (1, j)), twins, cofactor });
    }

    let summary = match cofactor_summary(&vs, tol) {
        Ok(s) => Some(s),
        Err(CofkitError::NoTwoFoldAxis) => {
            warnings.push("no type I/II twins: cofactor summary omitted".into());
            None
        }
        Err(e) => return Err(e),
    };

    let mut junctions = Vec::new();
    let mut stars = Vec::new();
    let mut hull = Vec::new();
    if system == CrystalSystem::Monoclinic && !pairs.is_empty() {
        for orbit in [CompoundOrbit::Orbit12, CompoundOrbit::Orbit13] {
            match compound_triple_junction(p, orbit, tol) {
                Ok(j) => junctions.push(j),
                Err(e) => warnings.push(format!("triple junction {:?}: {e}", orbit.pair())),
            }
        }
        let grid: Vec<f64> = (0..FAMILY_GRID).map(|i| i as f64 / (FAMILY_GRID - 1) as f64).collect();
        for pa in &pairs {
            match pa.class {
                PairClass::TypeOneTwo => {
                    for t in &pa.twins {
                        let entry = match star_classify(p, pa.pair, t.kind, opts.force, tol) {
                            Ok(r) => StarEntry { pair: pa.pair, kind: t.kind, report: Some(r), skipped: None },
                            Err(e @ CofkitError::NotACofactorTwin { .. }) => {
                                StarEntry { pair: pa.pair, kind: t.kind, report: None, skipped: Some(e.to_string()) }
                            }
                            Err(e) => return Err(e),
                        };
                        stars.push(entry);
                        if let Ok(fam) = type_i_ii_identity_family(&u, t, &grid, tol) {
                            hull.push(HullFinding {
                                pair: pa.pair,
                                kind: t.kind,
                                connections: fam.connections.len(),
                                detail: format!(
                                    "one-parameter family over {FAMILY_GRID} fractions; g fit {:.3e} vs predicted {:.3e}",
                                    fam.scan.kappa_fit, fam.scan.kappa_predicted
                                ),
                            });
                        }
                    }
                }
                PairClass::Compound => {
                    let finding = match compound_identity_connections(p, pa.pair, tol) {
                        Ok(c) => HullFinding {
                            pair: pa.pair,
                            kind: TwinKind::Compound,
                            connections: c.len(),
                            detail: "pure-variant interfaces only".into(),
                        },
                        Err(e) => HullFinding {
                            pair: pa.pair,
                            kind: TwinKind::Compound,
                            connections: 0,
                            detail: e.to_string(),
                        },
                    };
                    hull.push(finding);
                }
                PairClass::Incompatible => {}
            }
        }
    } else if system == CrystalSystem::Orthorhombic {
        warnings.push("star, junction and hull analysis cover the monoclinic system only".into());
    }

    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION.into(),
        input: InputEcho { source: source.into(), system, params: *p, matrix: u, tolerances: *tol },
        variants: VariantSummary { count: vs.len(), eigenvalues: vs.eigenvalues()?, variants: vs.variants.clone() },
        twin_table: table,
        pairs,
        summary,
        junctions,
        stars,
        hull,
        warnings,
    };
    report.normalized()
}

/// `x` rounded to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Rounds every non-integer number in a JSON tree.
pub fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_significant(x, digits)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, digits)),
        Value::Object(o) => o.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}

/// Serializes with numbers rounded to [`REPORT_DIGITS`].
pub fn to_rounded_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| CofkitError::InvalidInput(e.to_string()))?;
    round_json(&mut v, REPORT_DIGITS);
    serde_json::to_string_pretty(&v).map_err(|e| CofkitError::InvalidInput(e.to_string()))
}

impl AnalysisReport {
    /// The report as it reads back from its serialized form.
    pub fn normalized(&self) -> Result<Self> {
        Self::from_json(&self.to_json()?)
    }

    pub fn to_json(&self) -> Result<String> {
        to_rounded_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s).map_err(|e| CofkitError::InvalidInput(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(CofkitError::InvalidInput(format!("unsupported schema {}", r.schema_version)));
        }
        Ok(r)
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.input.params;
        let _ = writeln!(s, "input: {} ({:?})", self.input.source, self.input.system);
        let _ = writeln!(s, "  a = {}, b = {}, c = {}, d = {}", p.a, p.b, p.c, p.d);
        let ev = self.variants.eigenvalues;
        let _ = writeln!(
            s,
            "variants: {}, eigenvalues {:.6} {:.6} {:.6}",
            self.variants.count, ev[0], ev[1], ev[2]
        );
        let _ = writeln!(s, "twin table: {} rows", self.twin_table.rows.len());
        for row in &self.twin_table.rows {
            let cells: Vec<String> = row
                .cells
                .iter()
                .map(|c| {
                    let pairs: Vec<String> = c.pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
                    format!("{}: {}", c.column.label(), pairs.join(" "))
                })
                .collect();
            let _ = writeln!(s, "  {:<14} {}", row.rotation.label(), cells.join("; "));
        }
        if let Some(m) = &self.summary {
            let _ = writeln!(s, "cofactor metrics (best over pairs with variant 1):");
            let _ = writeln!(s, "  |lambda2 - 1|               {:.4e}", m.lambda2_dev);
            let _ = writeln!(s, "  cc2 type I / type II        {:.4e} / {:.4e}", m.cc2_type_i, m.cc2_type_ii);
            let _ = writeln!(
                s,
                "  ||U^-1 e|-1| / ||U e|-1|    {:.4e} / {:.4e}",
                m.equivalent_dev_type_i, m.equivalent_dev_type_ii
            );
            let _ = writeln!(
                s,
                "  new metric type I / II      {:.4e} {:?} / {:.4e} {:?}",
                m.metric_type_i, m.best_pair_type_i, m.metric_type_ii, m.best_pair_type_ii
            );
        }
        for j in &self.junctions {
            let _ = writeln!(
                s,
                "compound junction {:?}: |d-1| = {:.4e}, min E*-branch {:.4e}, min C*-branch {:.4e}",
                j.orbit.pair(),
                j.d_dev,
                j.branch_min(JunctionMatrix::EStar),
                j.branch_min(JunctionMatrix::CStar)
            );
        }
        for st in &self.stars {
            match (&st.report, &st.skipped) {
                (Some(r), _) => {
                    let _ = writeln!(
                        s,
                        "star {:?} {:?}: {:?}, mu* {:?}, distance to star curve {:?}",
                        st.pair, st.kind, r.classification, r.mu_star, r.distance_to_star
                    );
                }
                (None, Some(why)) => {
                    let _ = writeln!(s, "star {:?} {:?}: skipped ({why})", st.pair, st.kind);
                }
                _ => {}
            }
        }
        for h in &self.hull {
            let _ = writeln!(s, "hull {:?} {:?}: {} connections; {}", h.pair, h.kind, h.connections, h.detail);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_idempotent() {
        for x in [1.0 / 3.0, -2.718281828459045e-7, 6.02214076e23, 0.1 + 0.2] {
            let r = round_significant(x, 12);
            assert_eq!(round_significant(r, 12), r);
            assert!((r - x).abs() <= 1e-11 * x.abs());
        }
        assert_eq!(round_significant(0.0, 12), 0.0);
    }

    #[test]
    fn identity_input_is_degenerate() {
        let p = MonoclinicParams::new(1.0, 0.0, 1.0, 1.0);
        let r = analyze("inline", CrystalSystem::Monoclinic, &p, AnalyzeOptions::default(), &Tolerances::default())
            .unwrap();
        assert!(r.twin_table.rows.is_empty());
        assert!(r.warnings.iter().any(|w| w.contains("degenerate")));
        assert!(r.summary.is_none());
    }
}
