use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not in the span of the basis")]
    NotInSpan,
    #[error("vector is not a lattice point")]
    NotInLattice,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cone is not Gorenstein: {0}")]
    NotGorenstein(String),
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("ray map is not surjective onto N")]
    NotSurjective,
    #[error("inconsistent piecewise linear data: {0}")]
    Inconsistent(String),
    #[error("moment polytope is empty")]
    EmptyPolytope,
    #[error("divisor class is not ample")]
    NotAmple,
    #[error("no adapted basis: {0}")]
    NoBasis(String),
    #[error("vector is not in the sublattice N_m0")]
    NotInSublattice,
    #[error("inconsistent graph: {0}")]
    InconsistentGraph(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("search too large: {units} unit edges exceeds budget {budget}")]
    TooLarge { units: usize, budget: usize },
    #[error("degenerate heights: {0}")]
    DegenerateHeights(String),
    #[error("point lies on the divisor 1 + z_1...z_n = 0")]
    OnDivisor,
    #[error("Kahler form is singular at the given point")]
    SingularMetric,
    #[error("potential is not convex: {0}")]
    NotConvex(String),
}

pub type Result<T> = std::result::Result<T, Error>;
