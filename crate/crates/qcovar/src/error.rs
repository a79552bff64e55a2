use thiserror::Error;

/// Errors surfaced by validation, factorization, and the decomposition engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max |A[i][j] - conj(A[j][i])| = {residual:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} below -{tolerance:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("trace is {trace} but must be 1 within {tolerance:.3e}")]
    TraceNotOne { trace: f64, tolerance: f64 },

    #[error("matrix is numerically zero")]
    ZeroMatrix,

    #[error("observable list is empty")]
    EmptyTuple,

    #[error(
        "observables are not linearly independent over the reals: \
         span rank {span_rank} < {count}"
    )]
    DependentObservables { span_rank: usize, count: usize },

    #[error(
        "density is not in the feasible set: |Tr(D X_{index})| = {value:.3e} exceeds {tolerance:.3e} \
         (apply centering first, e.g. `center`/--center, if shift invariance is intended)"
    )]
    NotInFeasibleSet { index: usize, value: f64, tolerance: f64 },

    #[error("density is extreme: no perturbation exists, only the trivial decomposition")]
    ExtremeInput,

    #[error("perturbation direction is numerically zero (norm {norm:.3e})")]
    ZeroPerturbation { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decomposition budget exceeded: {nodes} nodes at depth {depth} (tolerance pathology?)")]
    BudgetExceeded { nodes: usize, depth: usize },

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
