use thiserror::Error;

pub type Result<T> = std::result::Result<T, CofkitError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CofkitError {
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("rotation axis is zero")]
    ZeroAxis,
    #[error("stretch tensor is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("the two variants are identical")]
    IdenticalVariants,
    #[error("two-fold axis gives a vanishing shear (degenerate axis)")]
    DegenerateAxis,
    #[error("volume fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),
    #[error("gradient is singular or has non-positive determinant")]
    SingularGradient,
    #[error("no austenite interface: middle singular value deviates from 1 by {deviation:.3e}")]
    NoSolution { deviation: f64 },
    #[error("the pair has no two-fold axis relating it")]
    NoTwoFoldAxis,
    #[error("the pair is not a type I/II pair (found {axes} two-fold axes)")]
    NotTypeOneTwo { axes: usize },
    #[error("shear vector is zero")]
    ZeroShear,
    #[error("twin is not a cofactor twin: residual {residual:.3e} exceeds gate {gate:.1e}")]
    NotACofactorTwin { residual: f64, gate: f64 },
    #[error("the twin is neither a star nor a half-star twin")]
    NotAStarTwin,
    #[error("{branch}: d = {d} lies outside the branch domain ({lo}, {hi})")]
    DomainViolation { branch: String, d: f64, lo: f64, hi: f64 },
    #[error("gradients {i} and {j} are not rank-one connected (sigma_2 = {sigma2:.3e})")]
    RankOneViolation { i: usize, j: usize, sigma2: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("middle eigenvalue deviates from 1 by {deviation:.3e}")]
    Cc1Violated { deviation: f64 },
    #[error("shared eigenvalue d = 1: the identity-connection set can have dimension two")]
    DegenerateD,
    #[error("the wells share no eigenvector with a common eigenvalue")]
    WellsIncompatible,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl CofkitError {
    /// Non-convergence maps to a distinct exit status in the CLI.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, CofkitError::NonConvergence { .. })
    }
}
