//! Numerical tolerances.
//!
//! Fixed numerics (Jacobi thresholds, symmetry checks) are constants. Everything a
//! user may reasonably want to loosen lives in [`Tolerances`], which can be
//! overridden from a `key=value,key=value` string (the CLI reads it from `--tol`
//! or the `COFKIT_TOL` environment variable).

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};

/// Off-diagonal threshold (relative to the Frobenius norm) that stops Jacobi sweeps.
pub const JACOBI_THRESHOLD: f64 = 1e-14;
/// Sweep cap for the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Relative asymmetry accepted by the symmetric eigensolver.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Angular distance below which two axes are the same axis.
pub const AXIS_MERGE_TOL: f64 = 1e-8;
/// Residual of the twinning equation every returned solution must meet.
pub const TWIN_RESIDUAL_TOL: f64 = 1e-10;
/// Residual of `R F = 1 + a (x) n` every returned habit solution must meet.
pub const HABIT_RESIDUAL_TOL: f64 = 1e-10;
/// Drift in `R^T R` above which a recovered rotation is re-projected.
pub const ROTATION_DRIFT_TOL: f64 = 1e-12;
/// Components smaller than this are treated as zero when normalizing signs.
pub const SIGN_ZERO_TOL: f64 = 1e-12;

/// Tunable tolerance bundle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual `|QUQ - V| / |U|` accepted for a two-fold axis.
    pub axis_residual: f64,
    /// Accepted `|sigma_2 - 1|` before the habit solver refuses.
    pub habit_sigma2: f64,
    /// Cofactor-condition gate for star classification.
    pub cc_gate: f64,
    /// Relative defect `|Q w - chi w| / |w|` accepted for a star witness.
    pub witness: f64,
    /// Triple-product magnitude below which vectors count as dependent.
    pub independence: f64,
    /// Second singular value accepted for a rank-one difference.
    pub rank_one: f64,
    /// Thresholds `|a-c|`, `|b|`, `|d-1|` below which parameters are non-generic.
    pub generic: f64,
    /// Tolerance for the det / eigenvector / stretch tests of hull membership.
    pub membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            axis_residual: 1e-9,
            habit_sigma2: 1e-6,
            cc_gate: 1e-6,
            witness: 1e-8,
            independence: 1e-6,
            rank_one: 1e-8,
            generic: 1e-8,
            membership: 1e-8,
        }
    }
}

impl Tolerances {
    /// Applies `key=value` overrides separated by commas or whitespace.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
        {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                CofkitError::InvalidInput(format!("tolerance override `{item}` is not key=value"))
            })?;
            let v: f64 = value.trim().parse().map_err(|_| {
                CofkitError::InvalidInput(format!("tolerance `{key}` has non-numeric value `{value}`"))
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(CofkitError::InvalidInput(format!(
                    "tolerance `{key}` must be positive and finite"
                )));
            }
            let slot = match key.trim() {
                "axis_residual" => &mut self.axis_residual,
                "habit_sigma2" => &mut self.habit_sigma2,
                "cc_gate" => &mut self.cc_gate,
                "witness" => &mut self.witness,
                "independence" => &mut self.independence,
                "rank_one" => &mut self.rank_one,
                "generic" => &mut self.generic,
                "membership" => &mut self.membership,
                other => {
                    return Err(CofkitError::InvalidInput(format!("unknown tolerance `{other}`")))
                }
            };
            *slot = v;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let t = Tolerances::default()
            .with_overrides("cc_gate=1e-3, habit_sigma2=2e-4")
            .unwrap();
        assert_eq!(t.cc_gate, 1e-3);
        assert_eq!(t.habit_sigma2, 2e-4);
        assert_eq!(t.witness, Tolerances::default().witness);
    }

    #[test]
    fn overrides_reject_garbage() {
        assert!(Tolerances::default().with_overrides("nope=1").is_err());
        assert!(Tolerances::default().with_overrides("cc_gate").is_err());
        assert!(Tolerances::default().with_overrides("cc_gate=-1").is_err());
        assert!(Tolerances::default().with_overrides("cc_gate=abc").is_err());
    }
}
