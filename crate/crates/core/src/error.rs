use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the lattice, geometry, cycle, numerics and solver layers.
///
/// Column and coordinate indices carried here are 0-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("det B_sigma = 0: the selected columns do not form a maximal simplex")]
    SingularSimplex,
    #[error("matrix has rank {rank}, expected full rank {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("the columns of B do not generate Z^d (quotient order {order}, |det B_sigma| = {index})")]
    LatticeNotSaturated { order: u64, index: u64 },
    #[error("no complete coset transversal found within {budget} candidates")]
    EnumerationBudgetExceeded { budget: usize },
    #[error("hull computation supports d <= 3, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("column {column} has no nonnegative decomposition over the vertex columns")]
    InfeasibleDecomposition { column: usize },
    #[error("no admissible delta: |a(n)| = {0} is not > 1")]
    NoAdmissibleDelta(String),
    #[error("coordinate y_{0} is zero")]
    ZeroCoordinate(usize),
    #[error("Gamma has a pole at z = {0}")]
    PoleAtNonpositiveInteger(f64),
    #[error("quadrature did not converge after {levels} levels (estimate {estimate:e}){}", axis.map(|a| format!(" on axis {a}")).unwrap_or_default())]
    NoConvergence {
        levels: usize,
        estimate: f64,
        axis: Option<usize>,
    },
    #[error("endpoint exponent alpha = {0} <= -1: integral diverges at 0")]
    EndpointSingularity(f64),
    #[error("radial coordinate on a stratum could not be solved")]
    ImplicitSolveFailure,
    #[error("convergence conditions fail for columns {failing:?}")]
    DivergentConfiguration { failing: Vec<usize> },
    #[error("Re beta_{coordinate} >= 0: use the meromorphic continuation")]
    ParameterOutOfHalfSpace { coordinate: usize },
    #[error("parameter hits a pole in coordinate {coordinate} (value {value})")]
    PoleEncountered { coordinate: usize, value: f64 },
    #[error("continuation recursion exceeded {budget} evaluations")]
    RecursionBudgetExceeded { budget: usize },
    #[error("multi-index is not in the support of this series")]
    NotInSupport,
    #[error("connection matrix is singular (|det| = {det_abs:e})")]
    SingularConnection { det_abs: f64 },
    #[error("x_{0} is zero but belongs to the simplex")]
    ZeroSimplexCoordinate(usize),
    #[error("epsilon must be positive, got {0}")]
    DegenerateEpsilon(f64),
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
